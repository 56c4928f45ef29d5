#pragma once

// A 3,200-record corpus with frozen per-cell counts: two models, four
// prompts, 400 records per cell. Every report table is a pure function of
// these counts, so the expected cells are known in advance.

#include <array>
#include <string>
#include <vector>

#include "skintone/record.hpp"

namespace golden {

inline const std::array<std::string, 2> kModels{"GPT", "NanoBanana"};
inline const std::array<std::string, 4> kPrompts{"a human being", "a person", "an individual", "someone"};
inline constexpr int kPerCell = 400;

// Indexed [model][prompt].
inline constexpr int kMen[2][4]{{397, 255, 368, 110}, {54, 4, 41, 2}};
inline constexpr double kAge[2][4]{{33.7, 31.2, 32.9, 29.0}, {24.1, 28.1, 25.3, 28.5}};
inline constexpr int kFst[2][4][6]{
    {{108, 249, 43, 0, 0, 0}, {119, 258, 22, 1, 0, 0}, {111, 249, 37, 3, 0, 0}, {131, 241, 28, 0, 0, 0}},
    {{21, 257, 91, 27, 4, 0}, {17, 97, 214, 70, 1, 1}, {14, 191, 97, 73, 23, 2}, {53, 224, 79, 42, 2, 0}}};
inline constexpr int kMst[2][4][10]{
    {{59, 38, 1, 293, 0, 0, 0, 0, 0, 9},
     {62, 28, 0, 301, 0, 0, 1, 0, 0, 8},
     {30, 19, 3, 335, 0, 1, 0, 1, 0, 11},
     {0, 0, 364, 0, 11, 2, 1, 8, 4, 10}},
    {{19, 1, 1, 357, 0, 0, 0, 1, 5, 16},
     {0, 0, 0, 0, 371, 19, 1, 3, 5, 1},
     {5, 3, 1, 353, 0, 0, 0, 2, 16, 20},
     {0, 0, 0, 344, 5, 12, 16, 8, 5, 10}}};
inline constexpr int kPerla[2][4][11]{
    {{2, 0, 0, 2, 0, 0, 1, 0, 348, 46, 1},
     {2, 0, 2, 1, 1, 0, 0, 3, 391, 0, 0},
     {0, 1, 3, 1, 1, 0, 9, 47, 338, 0, 0},
     {2, 1, 2, 0, 1, 0, 0, 0, 391, 3, 0}},
    {{2, 2, 0, 1, 0, 0, 26, 40, 329, 0, 0},
     {4, 4, 0, 0, 2, 2, 9, 379, 0, 0, 0},
     {11, 0, 1, 0, 0, 0, 0, 333, 22, 18, 15},
     {2, 2, 0, 1, 0, 0, 43, 74, 278, 0, 0}}};

inline const std::array<std::string, 5> kRaces{"White", "Latino Hispanic", "Middle Eastern", "Black", "Asian"};
inline constexpr int kRace[2][5]{{1550, 6, 0, 38, 6}, {1535, 42, 23, 0, 0}};

inline const std::array<std::string, 6> kFstLabels{"I", "II", "III", "IV", "V", "VI"};

// Index (1-based) of the category holding position i of a count vector.
template <std::size_t N>
int category_at(const int (&counts)[N], int i) {
  int acc = 0;
  for (std::size_t k = 0; k < N; ++k) {
    acc += counts[k];
    if (i < acc) return int(k) + 1;
  }
  return int(N);
}

inline std::vector<skintone::AnalysisRecord> records() {
  std::vector<skintone::AnalysisRecord> out;
  for (int m = 0; m < 2; ++m) {
    int race_pos = 0;
    for (int p = 0; p < 4; ++p) {
      for (int i = 0; i < kPerCell; ++i, ++race_pos) {
        skintone::AnalysisRecord r;
        r.image_id = kModels[m] + "_" + std::to_string(p) + "_" + std::to_string(i);
        r.model = kModels[m];
        r.prompt = kPrompts[p];
        r.gender = i < kMen[m][p] ? "Man" : "Woman";
        r.gender_confidence = 0.9;
        r.race = kRaces[std::size_t(category_at(kRace[m], race_pos) - 1)];
        r.age = kAge[m][p];
        r.expression = "neutral";
        const int f = category_at(kFst[m][p], i);
        r.fst = {"FST", f, kFstLabels[std::size_t(f - 1)], 1.0, 1.0};
        const int s = category_at(kMst[m][p], i);
        r.mst = {"MST", s, std::to_string(s), 1.0, 1.0};
        const int q = category_at(kPerla[m][p], i);
        r.perla = {"PERLA", q, std::to_string(q), 1.0, 1.0};
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

}  // namespace golden
