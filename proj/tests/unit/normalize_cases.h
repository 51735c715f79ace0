// Copyright 2026 The dner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DNER_TESTS_UNIT_NORMALIZE_CASES_H_
#define DNER_TESTS_UNIT_NORMALIZE_CASES_H_

namespace dner::testing {

struct NormCase {
  const char* in;
  const char* out;
};

// Lowercasing, NUM replacement and pass-through cases.
inline constexpr NormCase kNormalizeCases[] = {
    {"Cancer", "cancer"},       {"1234", "NUM"},
    {"p53", "p53"},             {"CANCER", "cancer"},
    {"cancer", "cancer"},       {"0", "NUM"},
    {"3.14", "NUM"},            {"1,000", "NUM"},
    {"-5", "NUM"},              {"50%", "NUM"},
    {"1-2", "NUM"},             {"2.5-3.0", "NUM"},
    {"12,345.67", "NUM"},       {"NUM", "NUM"},
    {"num", "num"},             {"Num", "num"},
    {"BRCA1", "brca1"},         {"IL-6", "il-6"},
    {"3q", "3q"},               {"x2", "x2"},
    {"1st", "1st"},             {"COVID-19", "covid-19"},
    {"-", "-"},                 {".", "."},
    {"%", "%"},                 {",", ","},
    {"--", "--"},               {"(", "("},
    {"AS", "as"},               {"as", "as"},
    {"Crohn's", "crohn's"},     {"TP53", "tp53"},
    {"DNA", "dna"},             {"mRNA", "mrna"},
    {"HbA1c", "hba1c"},         {"1e5", "1e5"},
    {"1/2", "1/2"},             {"+3", "+3"},
    {"07", "NUM"},              {"1990s", "1990s"},
    {"Type", "type"},           {"II", "ii"},
    {"x", "x"},                 {"Z", "z"},
    {"alpha-1", "alpha-1"},     {"<UNK>", "<unk>"},
    {"Straße", "straße"},       {"100.", "NUM"},
    {"%5", "NUM"},              {"e.g", "e.g"},
};

}  // namespace dner::testing

#endif  // DNER_TESTS_UNIT_NORMALIZE_CASES_H_
