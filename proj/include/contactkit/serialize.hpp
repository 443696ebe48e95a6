#pragma once

#include <string>
#include <vector>

#include "contactkit/classify.hpp"
#include "contactkit/continuation.hpp"
#include "contactkit/integrate.hpp"
#include "contactkit/model.hpp"
#include "json.hpp"

namespace contactkit {

// Formats with up to 17 significant digits (exact double round trip),
// locale-independent: '.' decimal point, no grouping, "nan"/"inf" spelled out.
std::string format_double(double v);

// Complete classification record for one point, keys in fixed order, with a
// top-level schema tag. Not-computed coefficients serialize as null.
nlohmann::ordered_json diagnostics_json(const FactorizedModel& model,
                                        const ContactDiagnostics& d, const Tolerances& tol);

// CSV emitters. All write a header row and one data row per record, fields
// formatted by format_double. Column sets:
//   trajectory: t, <coords...>
//   fibers:     fiber, t, <coords...>
//   branch:     index, arclength, <coords...>, verdict, order, slow_generic,
//               fold_coefficient, special   (special = 1 on bisected events)
//   scan:       index, <coords...>, verdict, order, slow_generic, c0_rank,
//               fold_coefficient, cusp_coefficient
std::string trajectory_csv(const Trajectory& tr, const std::vector<std::string>& coords);
std::string fibers_csv(const std::vector<Trajectory>& fibers,
                       const std::vector<std::string>& coords);
std::string branch_csv(const Branch& br, const std::vector<std::string>& coords);

struct ScanRow {
    long index = 0;
    Vec point;
    Classification verdict;
    double fold_coefficient = 0.0;
    double cusp_coefficient = 0.0;
    bool has_fold_coefficient = false;
    bool has_cusp_coefficient = false;
};
std::string scan_csv(const std::vector<ScanRow>& rows, const std::vector<std::string>& coords);

}  // namespace contactkit
