// Starts the prediction service on an ephemeral port with a throwaway store
// and walks through register, login, predict and feedback over HTTP.
#include <cstdio>
#include <filesystem>
#include <thread>

#include "cgpa/service/http.hpp"

int main() {
  using namespace cgpa;
  const auto dir = std::filesystem::temp_directory_path() / "cgpa_demo_service";
  std::filesystem::remove_all(dir);
  ServiceConfig cfg;
  cfg.store_path = (dir / "store.db").string();
  cfg.artifact_dir = (dir / "artifacts").string();
  cfg.secret = "demo-secret-change-me";
  std::filesystem::create_directories(dir);

  PredictionService service(cfg);
  HttpServer server(service, nullptr);
  const int port = server.bind_any("127.0.0.1");
  std::thread loop([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  const nlohmann::json cred{{"email", "student@example.org"}, {"credential", "correct horse"}};
  client.Post("/api/register", cred.dump(), "application/json");
  const auto login = nlohmann::json::parse(client.Post("/api/login", cred.dump(), "application/json")->body);
  const httplib::Headers auth{{"Authorization", "Bearer " + login["token"].get<std::string>()}};

  const auto schema = default_schema();
  auto input = to_json(generate_synthetic(default_sem_spec(), 1, &schema).records.front());
  input.erase("CGPA");
  const auto pred = nlohmann::json::parse(client.Post("/api/predict", auth, input.dump(), "application/json")->body);
  std::printf("predicted CGPA %.2f (%s), model v%d\n", pred["predicted_cgpa"].get<double>(),
              pred["band"].get<std::string>().c_str(), pred["model_version"].get<int>());

  const nlohmann::json fb{{"prediction_id", pred["prediction_id"]}, {"rating", 4}, {"actual_cgpa", 3.4}};
  client.Post("/api/feedback", auth, fb.dump(), "application/json");
  const auto info = nlohmann::json::parse(client.Get("/api/model/info", auth)->body);
  std::printf("feedback recorded: %d\n", info["feedback_count"].get<int>());

  server.stop();
  loop.join();
  std::filesystem::remove_all(dir);
}
