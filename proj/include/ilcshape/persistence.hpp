#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "ilcshape/lti.hpp"
#include "ilcshape/reduction.hpp"
#include "ilcshape/signal.hpp"
#include "ilcshape/validation.hpp"

namespace ilcshape {

// CSV: "# anchor=<int> fs=<real>" then one sample per line (17 significant digits).
void write_sequence_csv(std::ostream& os, const Sequence& x);
Sequence read_sequence_csv(std::istream& is);
void write_fir_csv(std::ostream& os, const TwoSidedFir& f, double sample_rate_hz);
TwoSidedFir read_fir_csv(std::istream& is);

nlohmann::json tf_to_json(const RationalTf& tf);
RationalTf tf_from_json(const nlohmann::json& j);

nlohmann::json reduction_to_json(const ReductionResult& r);
nlohmann::json metrics_to_json(const StepMetrics& m);
nlohmann::json report_to_json(const SpecReport& r);

/// CSV "t_s,y".
void write_step_csv(std::ostream& os, const Sequence& y);

std::string format_real(double v);

}  // namespace ilcshape
