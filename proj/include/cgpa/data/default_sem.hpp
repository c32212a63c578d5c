#pragma once

#include <json.hpp>

#include "cgpa/data/sem.hpp"

namespace cgpa {

/// Illustrative linear non-Gaussian SEM over the 23 survey factors. The
/// coefficients are hand-chosen; thresholds sit at quantiles of each latent
/// variable so level frequencies look plausible. Department and relationship
/// codes follow a shuffled order, which makes their effect on CGPA
/// non-monotone in the code.
/// data/fig3_sem.json holds the same document.
inline SemSpec default_sem_spec() {
  static const char* const kDoc = R"json(
{
 "nodes": [
  "DI",
  "YS",
  "G",
  "SSC",
  "HSC",
  "FE",
  "ME",
  "FJ",
  "MJ",
  "MI",
  "AC",
  "SH",
  "IF",
  "GS",
  "S",
  "PI",
  "HS",
  "PSR",
  "C",
  "RS",
  "CS",
  "SCI",
  "CGPA"
 ],
 "edges": [
  {
   "from": "SSC",
   "to": "HSC",
   "weight": 0.7
  },
  {
   "from": "FE",
   "to": "HSC",
   "weight": 0.3
  },
  {
   "from": "SSC",
   "to": "DI",
   "weight": 0.3
  },
  {
   "from": "HSC",
   "to": "DI",
   "weight": 0.3
  },
  {
   "from": "SSC",
   "to": "CGPA",
   "weight": 0.3
  },
  {
   "from": "HSC",
   "to": "CGPA",
   "weight": 0.3
  },
  {
   "from": "DI",
   "to": "CGPA",
   "weight": 1.0
  },
  {
   "from": "DI",
   "to": "PI",
   "weight": 0.4
  },
  {
   "from": "RS",
   "to": "PI",
   "weight": 0.5
  },
  {
   "from": "PI",
   "to": "CGPA",
   "weight": -0.3
  },
  {
   "from": "S",
   "to": "CGPA",
   "weight": 0.3
  },
  {
   "from": "RS",
   "to": "CGPA",
   "weight": 1.0
  },
  {
   "from": "FE",
   "to": "FJ",
   "weight": 0.6
  },
  {
   "from": "ME",
   "to": "MJ",
   "weight": 0.6
  },
  {
   "from": "FE",
   "to": "S",
   "weight": 0.4
  },
  {
   "from": "ME",
   "to": "S",
   "weight": 0.4
  },
  {
   "from": "FJ",
   "to": "RS",
   "weight": 0.4
  },
  {
   "from": "MJ",
   "to": "RS",
   "weight": 0.4
  },
  {
   "from": "FE",
   "to": "C",
   "weight": 0.5
  },
  {
   "from": "AC",
   "to": "CGPA",
   "weight": 0.3
  },
  {
   "from": "SH",
   "to": "CGPA",
   "weight": 0.3
  },
  {
   "from": "GS",
   "to": "SH",
   "weight": 0.6
  },
  {
   "from": "IF",
   "to": "SH",
   "weight": 0.5
  },
  {
   "from": "SCI",
   "to": "CS",
   "weight": 0.7
  },
  {
   "from": "CS",
   "to": "CGPA",
   "weight": 0.3
  },
  {
   "from": "HSC",
   "to": "PSR",
   "weight": 0.6
  },
  {
   "from": "C",
   "to": "SH",
   "weight": -0.4
  },
  {
   "from": "MI",
   "to": "AC",
   "weight": -0.6
  },
  {
   "from": "G",
   "to": "SH",
   "weight": 0.4
  },
  {
   "from": "YS",
   "to": "AC",
   "weight": -0.3
  }
 ],
 "noise": {
  "DI": {
   "kind": "uniform",
   "a": -4.330127,
   "b": 4.330127
  },
  "YS": {
   "kind": "uniform",
   "a": -1.732051,
   "b": 1.732051
  },
  "G": {
   "kind": "uniform",
   "a": -1.732051,
   "b": 1.732051
  },
  "SSC": {
   "kind": "laplace",
   "b": 0.707107
  },
  "HSC": {
   "kind": "laplace",
   "b": 0.707107
  },
  "FE": {
   "kind": "laplace",
   "b": 0.707107
  },
  "ME": {
   "kind": "uniform",
   "a": -1.732051,
   "b": 1.732051
  },
  "FJ": {
   "kind": "uniform",
   "a": -1.732051,
   "b": 1.732051
  },
  "MJ": {
   "kind": "uniform",
   "a": -1.732051,
   "b": 1.732051
  },
  "MI": {
   "kind": "uniform",
   "a": -1.732051,
   "b": 1.732051
  },
  "AC": {
   "kind": "laplace",
   "b": 0.707107
  },
  "SH": {
   "kind": "laplace",
   "b": 0.707107
  },
  "IF": {
   "kind": "uniform",
   "a": -1.732051,
   "b": 1.732051
  },
  "GS": {
   "kind": "uniform",
   "a": -1.732051,
   "b": 1.732051
  },
  "S": {
   "kind": "uniform",
   "a": -1.732051,
   "b": 1.732051
  },
  "PI": {
   "kind": "laplace",
   "b": 0.707107
  },
  "HS": {
   "kind": "uniform",
   "a": -1.732051,
   "b": 1.732051
  },
  "PSR": {
   "kind": "uniform",
   "a": -1.732051,
   "b": 1.732051
  },
  "C": {
   "kind": "laplace",
   "b": 0.707107
  },
  "RS": {
   "kind": "laplace",
   "b": 0.707107
  },
  "CS": {
   "kind": "uniform",
   "a": -1.732051,
   "b": 1.732051
  },
  "SCI": {
   "kind": "uniform",
   "a": -1.732051,
   "b": 1.732051
  },
  "CGPA": {
   "kind": "uniform",
   "a": -0.866025,
   "b": 0.866025
  }
 },
 "discretizers": {
  "DI": {
   "thresholds": [
    -3.8641,
    -3.2625,
    -2.7133,
    -2.1742,
    -1.6286,
    -1.0816,
    -0.5377,
    0.0013,
    0.5364,
    1.0792,
    1.6191,
    2.1665,
    2.7079,
    3.2619,
    3.8558
   ],
   "levels": [
    "Law",
    "Mathematics",
    "Pharmacy",
    "Chemistry",
    "Botany",
    "Architecture",
    "Statistics",
    "Economics",
    "Biochemistry",
    "English",
    "Accounting",
    "Bangla",
    "IIT",
    "CSE",
    "Zoology",
    "Physics"
   ]
  },
  "YS": {
   "thresholds": [
    -1.3868,
    -1.0396,
    -0.6932,
    -0.3461,
    -0.0002,
    0.3473,
    0.6945,
    1.0387,
    1.3844
   ],
   "levels": [
    "1.0",
    "1.5",
    "2.0",
    "2.5",
    "3.0",
    "3.5",
    "4.0",
    "4.5",
    "5.0",
    "5.5"
   ]
  },
  "G": {
   "thresholds": [
    -0.1774
   ],
   "levels": [
    "Female",
    "Male"
   ]
  },
  "SSC": {
   "affine": {
    "offset": 4.2,
    "scale": 0.450399,
    "decimals": 2
   }
  },
  "HSC": {
   "affine": {
    "offset": 4.3,
    "scale": 0.39848,
    "decimals": 2
   }
  },
  "FE": {
   "affine": {
    "offset": 10,
    "scale": 3.993524,
    "decimals": 0
   }
  },
  "ME": {
   "affine": {
    "offset": 9,
    "scale": 4.00256,
    "decimals": 0
   }
  },
  "FJ": {
   "thresholds": [
    -1.8204,
    -1.2884,
    -0.7136,
    -0.356,
    0.3519,
    1.2859
   ],
   "levels": [
    "Unemployed",
    "Day labourer",
    "Farmer",
    "Retired",
    "Private job",
    "Business",
    "Govt. job"
   ]
  },
  "MJ": {
   "thresholds": [
    -1.6986,
    0.6271,
    1.0781,
    1.5736
   ],
   "levels": [
    "Unemployed",
    "Housewife",
    "Private job",
    "Business",
    "Govt. job"
   ]
  },
  "MI": {
   "thresholds": [
    1.3879
   ],
   "levels": [
    "No",
    "Yes"
   ]
  },
  "AC": {
   "thresholds": [
    -1.4376,
    -0.2815
   ],
   "levels": [
    "0-50%",
    "50-75%",
    "75-100%"
   ]
  },
  "SH": {
   "thresholds": [
    -0.6909,
    0.6966,
    1.736
   ],
   "levels": [
    "0-3 hours",
    "3-9 hours",
    "9-15 hours",
    "15+ hours"
   ]
  },
  "IF": {
   "thresholds": [
    -1.2108,
    -0.0016
   ],
   "levels": [
    "Not available",
    "Limited",
    "Available"
   ]
  },
  "GS": {
   "thresholds": [
    -0.6908,
    0.8687
   ],
   "levels": [
    "Never",
    "Sometimes",
    "Participate"
   ]
  },
  "S": {
   "thresholds": [
    0.3441
   ],
   "levels": [
    "No",
    "Yes"
   ]
  },
  "PI": {
   "thresholds": [
    1.3028
   ],
   "levels": [
    "No",
    "Yes"
   ]
  },
  "HS": {
   "thresholds": [
    -0.3476,
    0.3473
   ],
   "levels": [
    "Never",
    "Irregular",
    "Regular"
   ]
  },
  "PSR": {
   "thresholds": [
    0.9274
   ],
   "levels": [
    "No",
    "Yes"
   ]
  },
  "C": {
   "thresholds": [
    0.2157,
    0.7891,
    1.4775
   ],
   "levels": [
    "None",
    "1-3000",
    "3000-5000",
    "5000+"
   ]
  },
  "RS": {
   "thresholds": [
    -1.9344,
    -0.4092
   ],
   "levels": [
    "Relationship",
    "Single",
    "Married"
   ]
  },
  "CS": {
   "thresholds": [
    -1.1119,
    0.6977
   ],
   "levels": [
    "Poor",
    "Average",
    "Good"
   ]
  },
  "SCI": {
   "thresholds": [
    -1.558,
    -1.04,
    0.1741,
    1.2103
   ],
   "levels": [
    "Not confident",
    "Not enough confident",
    "Moderately confident",
    "Confident",
    "Very confident"
   ]
  },
  "CGPA": {
   "affine": {
    "offset": 3.150802,
    "scale": 0.157211,
    "decimals": 2
   }
  }
 },
 "seed": 20240601
}
)json";
  return sem_from_json(nlohmann::json::parse(kDoc));
}

}  // namespace cgpa
