#include "ilcshape/persistence.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ilcshape/errors.hpp"

namespace ilcshape {

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

void write_sequence_csv(std::ostream& os, const Sequence& x) {
  fmt::print(os, "# anchor={} fs={}\n", x.anchor(), format_real(x.sample_rate_hz()));
  for (double v : x.samples()) fmt::print(os, "{}\n", format_real(v));
}

Sequence read_sequence_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("sequence CSV: missing header");
  long long anchor = 0;
  double fs = 0.0;
  {
    if (line.rfind("# anchor=", 0) != 0) throw ConfigError("sequence CSV: header must start with '# anchor='");
    const auto fs_pos = line.find(" fs=");
    if (fs_pos == std::string::npos) throw ConfigError("sequence CSV: header lacks fs=");
    try {
      anchor = std::stoll(line.substr(9, fs_pos - 9));
      fs = std::stod(line.substr(fs_pos + 4));
    } catch (const std::exception&) {
      throw ConfigError("sequence CSV: malformed header '" + line + "'");
    }
  }
  std::vector<double> samples;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line, &used);
    } catch (const std::exception&) {
      throw ConfigError("sequence CSV: malformed sample '" + line + "'");
    }
    if (line.find_first_not_of(" \t\r", used) != std::string::npos)
      throw ConfigError("sequence CSV: malformed sample '" + line + "'");
    samples.push_back(v);
  }
  try {
    return Sequence(std::move(samples), static_cast<Index>(anchor), fs);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("sequence CSV: ") + e.what());
  }
}

void write_fir_csv(std::ostream& os, const TwoSidedFir& f, double sample_rate_hz) {
  write_sequence_csv(os, f.to_sequence(sample_rate_hz));
}

TwoSidedFir read_fir_csv(std::istream& is) {
  const Sequence x = read_sequence_csv(is);
  if (x.empty()) throw ConfigError("FIR CSV: no taps");
  return TwoSidedFir::from_sequence(x);
}

nlohmann::json tf_to_json(const RationalTf& tf) {
  return {{"num", tf.num()}, {"den", tf.den()}, {"fs_hz", tf.sample_rate_hz()}};
}

RationalTf tf_from_json(const nlohmann::json& j) {
  try {
    const double fs = j.contains("fs_hz") ? j.at("fs_hz").get<double>() : 1.0;
    return RationalTf(j.at("num").get<Coeffs>(), j.at("den").get<Coeffs>(), fs);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("transfer function JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("transfer function JSON: ") + e.what());
  }
}

nlohmann::json reduction_to_json(const ReductionResult& r) {
  auto db = [](double v) -> nlohmann::json { return v > 0.0 ? nlohmann::json(to_db(v)) : nlohmann::json(nullptr); };
  return {{"reduced", tf_to_json(r.reduced)},
          {"order", r.order},
          {"hankel_singular_values", r.hankel_singular_values},
          {"error_bound", r.error_bound},
          {"error_bound_db", db(r.error_bound)},
          {"measured_grid_error", r.measured_grid_error},
          {"measured_grid_error_db", db(r.measured_grid_error)},
          {"bound_certified", r.measured_grid_error <= r.error_bound + 1e-9 * (r.hankel_singular_values.empty()
                                                                                  ? 0.0
                                                                                  : r.hankel_singular_values[0])},
          {"reduced_spectral_radius", r.reduced_spectral_radius}};
}

nlohmann::json metrics_to_json(const StepMetrics& m) {
  return {{"rise_time_s", m.rise_time_s},
          {"settling_time_s", m.settling_time_s},
          {"overshoot_fraction", m.overshoot_fraction},
          {"steady_state_error_fraction", m.steady_state_error_fraction},
          {"final_value", m.final_value},
          {"settled", m.settled},
          {"phase_margin_deg", m.phase_margin_deg},
          {"gain_crossover_hz", m.gain_crossover_hz}};
}

nlohmann::json report_to_json(const SpecReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"measured", c.measured},
                      {"bound", c.bound},
                      {"comparison", c.upper ? "<=" : ">="},
                      {"pass", c.pass}});
  return {{"checks", checks}, {"pass", r.pass}};
}

void write_step_csv(std::ostream& os, const Sequence& y) {
  os << "t_s,y\n";
  const double fs = y.sample_rate_hz();
  for (std::size_t k = 0; k < y.size(); ++k)
    fmt::print(os, "{},{}\n", format_real(static_cast<double>(static_cast<Index>(k) - y.anchor()) / fs),
               format_real(y[k]));
}

}  // namespace ilcshape
