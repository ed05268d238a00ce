#include <array>

#include "ratedml/preprocess.hpp"

namespace ratedml {

namespace {

// Dickey-Fuller t-ratio quantiles (1%, 5%, 10%), constant and no trend, from
//   ratedml critvals --reps 200000 --seed 1 --format cpp
// The n = 10000 row stands in for the asymptotic limit.
constexpr std::array<CriticalValueRow, 5> kTable{{
    {50, {-3.560583652279038, -2.9216738079159907, -2.6003515064263922}},
    {100, {-3.501575094319794, -2.886198221081864, -2.583709568316259}},
    {250, {-3.4528763108276888, -2.872377536328978, -2.5742006167935045}},
    {500, {-3.45539430384681, -2.8702712070555347, -2.5703313750886103}},
    {10000, {-3.4294445627889654, -2.856395802137821, -2.564267539811392}},
}};

}  // namespace

std::span<const CriticalValueRow> compiled_critical_values() { return kTable; }

}  // namespace ratedml
