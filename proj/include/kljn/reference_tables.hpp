#pragma once

// Published Monte Carlo reference values for the LH state, 1000 steps,
// 1000 runs, Johnson-scaled mixing. Used by `tables --check` and by the
// acceptance suite; CCC entries are single realisations and only indicative.

#include <array>

#include "kljn/types.hpp"

namespace kljn::reference {

inline constexpr std::array<double, 6> kMGrid{0.0, 0.1, 0.5, 1.0, 1.5, 10.0};

struct WireCccRow {
    double m;
    Combo probe;
    double ccc_u, ccc_i, ccc_p;
};

struct WirePRow {
    double m;
    double p_u, p_i, p_p;
};

// Bilateral wire attack.
inline constexpr std::array<WireCccRow, 24> kTable1Ccc{{
    {0.0, Combo::HH, 0.213960, 0.674280, 0.286570},
    {0.0, Combo::LL, 0.675060, 0.212460, 0.285320},
    {0.0, Combo::HL, 0.002088, 0.000370, 0.000157},
    {0.0, Combo::LH, 1.0, 1.0, 1.0},
    {0.1, Combo::HH, 0.039932, 0.109800, 0.009254},
    {0.1, Combo::LL, 0.347620, 0.125890, 0.076979},
    {0.1, Combo::HL, 0.000239, -0.000177, -0.000988},
    {0.1, Combo::LH, 0.485410, 0.216720, 0.114570},
    {0.5, Combo::HH, 0.009068, 0.026372, -0.001256},
    {0.5, Combo::LL, 0.080356, 0.026207, 0.003574},
    {0.5, Combo::HL, -0.000313, 0.001804, -0.000401},
    {0.5, Combo::LH, 0.112630, 0.044934, 0.003888},
    {1.0, Combo::HH, 0.004431, 0.012502, -0.000065},
    {1.0, Combo::LL, 0.040189, 0.012589, 0.000728},
    {1.0, Combo::HL, -0.000166, -0.000217, -0.000023},
    {1.0, Combo::LH, 0.056232, 0.022431, 0.001271},
    {1.5, Combo::HH, 0.001820, 0.008615, -0.000281},
    {1.5, Combo::LL, 0.027865, 0.007432, -0.001454},
    {1.5, Combo::HL, -0.000490, 0.000293, -0.000130},
    {1.5, Combo::LH, 0.038744, 0.014521, 0.001894},
    {10.0, Combo::HH, 0.000908, 0.000263, 0.000477},
    {10.0, Combo::LL, 0.003666, 0.001263, 0.001151},
    {10.0, Combo::HL, -0.000805, -0.000011, -0.000055},
    {10.0, Combo::LH, 0.006126, 0.002058, 0.001359},
}};

inline constexpr std::array<WirePRow, 6> kTable1P{{
    {0.0, 1.0, 1.0, 1.0},
    {0.1, 1.0, 1.0, 0.995},
    {0.5, 0.998, 0.781, 0.550},
    {1.0, 0.904, 0.651, 0.544},
    {1.5, 0.827, 0.600, 0.524},
    {10.0, 0.558, 0.528, 0.518},
}};

// Bilateral source attack: Alice reconstruction vs her L/H copies, Bob
// reconstruction vs his L/H copies.
struct SourceRow {
    double m;
    double alice_l, alice_h, bob_l, bob_h;
    double p;
};

inline constexpr std::array<SourceRow, 6> kTable2{{
    {0.0, 1.0, -0.015600, 0.00028951, 0.560400, 1.0},
    {0.1, 0.515040, 0.008990, 0.002046, 0.131430, 0.992},
    {0.5, 0.118910, -0.028922, 0.000017, 0.029605, 0.669},
    {1.0, 0.060229, 0.009445, -0.000460, -0.011328, 0.569},
    {1.5, 0.048146, 0.039420, 0.000012, 0.026396, 0.547},
    {10.0, 0.007059, -0.001521, 0.000348, -0.011921, 0.501},
}};

// Unilateral wire attack. The current column's LL/LH entries appear
// transposed in the published layout; kept verbatim.
inline constexpr std::array<WireCccRow, 24> kTable3Ccc{{
    {0.0, Combo::HH, -0.000023, 0.000145, 0.000005},
    {0.0, Combo::LL, 0.673820, 0.090397, 0.16462},
    {0.0, Combo::HL, -0.001374, -0.000015, -0.000032},
    {0.0, Combo::LH, 0.909330, 0.211650, 0.285270},
    {0.1, Combo::HH, -0.001021, 0.000957, -0.000044},
    {0.1, Combo::LL, 0.379860, 0.048214, 0.043738},
    {0.1, Combo::HL, 0.000501, 0.000236, 0.001270},
    {0.1, Combo::LH, 0.468500, 0.110610, 0.076680},
    {0.5, Combo::HH, -0.000207, 0.000175, -0.0013809},
    {0.5, Combo::LL, 0.079899, 0.001031, 0.000677},
    {0.5, Combo::HL, -0.000998, 0.009610, -0.0011319},
    {0.5, Combo::LH, 0.108640, 0.024430, 0.002906},
    {1.0, Combo::HH, 0.000288, 0.000091, 0.001396},
    {1.0, Combo::LL, 0.040892, 0.012783, -0.000151},
    {1.0, Combo::HL, 0.000892, -0.000116, 0.001294},
    {1.0, Combo::LH, 0.054347, 0.057347, 0.003950},
    {1.5, Combo::HH, -0.000615, -0.000169, -0.000136},
    {1.5, Combo::LL, 0.027794, 0.008971, 0.000731},
    {1.5, Combo::HL, -0.000503, 0.000944, 0.000212},
    {1.5, Combo::LH, 0.037697, 0.026552, 0.001249},
    {10.0, Combo::HH, -0.000042, -0.000376, -0.001033},
    {10.0, Combo::LL, 0.004576, 0.000405, 0.002124},
    {10.0, Combo::HL, 0.000462, -0.000483, 0.000807},
    {10.0, Combo::LH, 0.005711, 0.000949, 0.002155},
}};

inline constexpr std::array<WirePRow, 6> kTable3P{{
    {0.0, 1.0, 0.98, 0.992},
    {0.1, 1.0, 0.863, 0.801},
    {0.5, 0.994, 0.581, 0.518},
    {1.0, 0.886, 0.542, 0.517},
    {1.5, 0.805, 0.523, 0.508},
    {10.0, 0.539, 0.514, 0.501},
}};

// Unilateral source attack with R_B inference.
struct UnilateralSourceRow {
    double m;
    double alice_l, alice_h;
    double p;
};

inline constexpr std::array<UnilateralSourceRow, 6> kTable4{{
    {0.0, 1.0, -0.015600, 1.0},
    {0.1, 0.515220, 0.008990, 1.0},
    {0.5, 0.118910, -0.028922, 0.999},
    {1.0, 0.060047, 0.009445, 0.907},
    {1.5, 0.048146, 0.040953, 0.804},
    {10.0, 0.005654, -0.001521, 0.546},
}};

/// Headline p per grid point for table 1..4 (p_u for the wire tables).
inline double headline_p(int table, std::size_t i) {
    switch (table) {
        case 1: return kTable1P[i].p_u;
        case 2: return kTable2[i].p;
        case 3: return kTable3P[i].p_u;
        case 4: return kTable4[i].p;
        default: break;
    }
    throw InvalidArgument("table must be 1..4");
}

}  // namespace kljn::reference
