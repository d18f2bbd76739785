#include "app.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "ilcshape/errors.hpp"
#include "ilcshape/persistence.hpp"

namespace ilcshape::app {

using nlohmann::json;
namespace fs = std::filesystem;

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256: digest failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

// ---------------------------------------------------------------- config

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}.{}: {}", where, key, e.what()));
  }
}

RationalTf parse_tf(const json& j, double fs, const std::string& where) {
  reject_unknown(j, {"num", "den", "fs_hz"}, where);
  if (!j.contains("num") || !j.contains("den")) throw ConfigError(where + ": needs 'num' and 'den'");
  const double tf_fs = get_or<double>(j, "fs_hz", fs, where);
  if (std::abs(tf_fs - fs) > 1e-12 * fs) throw ConfigError(where + ": fs_hz differs from sample_rate_hz");
  try {
    return RationalTf(j.at("num").get<Coeffs>(), j.at("den").get<Coeffs>(), fs);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", where, e.what()));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("{}: {}", where, e.what()));
  }
}

std::size_t get_count(const json& obj, const char* key, std::size_t fallback, const std::string& where) {
  const auto v = get_or<long long>(obj, key, static_cast<long long>(fallback), where);
  if (v < 0) throw ConfigError(fmt::format("{}.{}: must be nonnegative", where, key));
  return static_cast<std::size_t>(v);
}

}  // namespace

PipelineConfig parse_config(const json& j, const fs::path& config_dir) {
  reject_unknown(j, {"sample_rate_hz", "plant", "desired_loop_gain", "horizon", "loopshape", "inverse_learning", "ilc",
                     "reduction", "validation", "output_dir"},
                 "config");
  PipelineConfig c;
  c.config_dir = config_dir;
  if (!j.contains("sample_rate_hz")) throw ConfigError("config: sample_rate_hz is required");
  c.sample_rate_hz = get_or<double>(j, "sample_rate_hz", 0.0, "config");
  if (!(c.sample_rate_hz > 0.0)) throw ConfigError("config: sample_rate_hz must be positive");

  if (!j.contains("plant")) throw ConfigError("config: plant is required");
  const json& plant = j.at("plant");
  reject_unknown(plant, {"num", "den", "fs_hz", "command"}, "plant");
  const bool has_tf = plant.contains("num") || plant.contains("den");
  const bool has_cmd = plant.contains("command");
  if (has_tf == has_cmd) throw ConfigError("plant: give exactly one of an inline transfer function or a command");
  if (has_tf) {
    c.plant.model = parse_tf(plant, c.sample_rate_hz, "plant");
  } else {
    c.plant.command = get_or<std::vector<std::string>>(plant, "command", {}, "plant");
    if (c.plant.command.empty()) throw ConfigError("plant.command: empty command");
    fs::path exe = c.plant.command[0];
    if (exe.is_relative() && exe.has_parent_path()) exe = config_dir / exe;
    if (exe.has_parent_path() && !fs::exists(exe)) throw ConfigError("plant.command: no such file " + exe.string());
    c.plant.command[0] = exe.string();
  }

  if (!j.contains("desired_loop_gain")) throw ConfigError("config: desired_loop_gain is required");
  c.desired_loop_gain = parse_tf(j.at("desired_loop_gain"), c.sample_rate_hz, "desired_loop_gain");
  if (!c.desired_loop_gain.is_proper()) throw ConfigError("desired_loop_gain: must be proper");

  auto& ls = c.loopshape;
  ls.horizon = get_count(j, "horizon", ls.horizon, "config");
  const json empty = json::object();
  const json& lsj = j.value("loopshape", empty);
  reject_unknown(lsj, {"truncation_threshold", "slow_pole_radius", "frequency_weighting", "anticausal_margin",
                       "probe_length", "anticausal_energy_limit"},
                 "loopshape");
  ls.truncation_threshold = get_or<double>(lsj, "truncation_threshold", ls.truncation_threshold, "loopshape");
  ls.slow_pole_radius = get_or<double>(lsj, "slow_pole_radius", ls.slow_pole_radius, "loopshape");
  ls.frequency_weighting = get_or<bool>(lsj, "frequency_weighting", ls.frequency_weighting, "loopshape");
  ls.anticausal_margin = get_count(lsj, "anticausal_margin", ls.anticausal_margin, "loopshape");
  ls.probe_length = get_count(lsj, "probe_length", ls.probe_length, "loopshape");
  ls.anticausal_energy_limit =
      get_or<double>(lsj, "anticausal_energy_limit", ls.anticausal_energy_limit, "loopshape");

  auto& inv = ls.inverse;
  const json& ij = j.value("inverse_learning", empty);
  reject_unknown(ij, {"filter_half_length", "total_iterations", "cross_update_period", "cross_update",
                      "initial_gain_alpha", "reference_shaping", "stop_error_db"},
                 "inverse_learning");
  inv.filter_half_length = get_count(ij, "filter_half_length", inv.filter_half_length, "inverse_learning");
  inv.total_iterations = get_count(ij, "total_iterations", inv.total_iterations, "inverse_learning");
  inv.cross_update_period = get_count(ij, "cross_update_period", inv.cross_update_period, "inverse_learning");
  inv.cross_update = get_or<bool>(ij, "cross_update", inv.cross_update, "inverse_learning");
  inv.initial_gain_alpha = get_or<double>(ij, "initial_gain_alpha", inv.initial_gain_alpha, "inverse_learning");
  inv.stop_error_db = get_or<double>(ij, "stop_error_db", inv.stop_error_db, "inverse_learning");
  if (ij.contains("reference_shaping") && !ij.at("reference_shaping").is_null()) {
    const json& rs = ij.at("reference_shaping");
    reject_unknown(rs, {"cutoff_normalized", "half_length"}, "inverse_learning.reference_shaping");
    LowpassShaping s;
    s.cutoff_normalized = get_or<double>(rs, "cutoff_normalized", s.cutoff_normalized, "reference_shaping");
    s.half_length = get_count(rs, "half_length", s.half_length, "reference_shaping");
    if (!(s.cutoff_normalized > 0.0 && s.cutoff_normalized <= 1.0) || s.half_length == 0)
      throw ConfigError("inverse_learning.reference_shaping: cutoff must lie in (0, 1], half_length positive");
    inv.reference_shaping = s;
  }

  const json& ilcj = j.value("ilc", empty);
  reject_unknown(ilcj, {"max_iterations", "stop_error_db", "divergence_factor"}, "ilc");
  ls.ilc.max_iterations = get_count(ilcj, "max_iterations", ls.ilc.max_iterations, "ilc");
  ls.ilc.stop_error_db = get_or<double>(ilcj, "stop_error_db", ls.ilc.stop_error_db, "ilc");
  ls.ilc.divergence_factor = get_or<double>(ilcj, "divergence_factor", ls.ilc.divergence_factor, "ilc");

  const json& rj = j.value("reduction", empty);
  reject_unknown(rj, {"energy_fraction", "order", "grid_size"}, "reduction");
  c.reduction.energy_fraction = get_or<double>(rj, "energy_fraction", c.reduction.energy_fraction, "reduction");
  if (rj.contains("order") && !rj.at("order").is_null()) c.reduction.order = get_count(rj, "order", 0, "reduction");
  if (!(c.reduction.energy_fraction > 0.0 && c.reduction.energy_fraction <= 1.0))
    throw ConfigError("reduction.energy_fraction must lie in (0, 1]");
  c.reduction_grid = get_count(rj, "grid_size", c.reduction_grid, "reduction");

  const json& vj = j.value("validation", empty);
  reject_unknown(vj, {"horizon_s", "grid_size", "spec"}, "validation");
  c.validation_horizon_s = get_or<double>(vj, "horizon_s", c.validation_horizon_s, "validation");
  c.margin_grid = get_count(vj, "grid_size", c.margin_grid, "validation");
  if (!(c.validation_horizon_s > 0.0)) throw ConfigError("validation.horizon_s must be positive");
  const json& sj = vj.value("spec", empty);
  reject_unknown(sj, {"rise_time_max_s", "settling_time_max_s", "overshoot_max_fraction", "phase_margin_min_deg",
                      "steady_state_error_max_fraction", "settling_band_fraction"},
                 "validation.spec");
  auto& s = c.spec;
  s.rise_time_max_s = get_or<double>(sj, "rise_time_max_s", s.rise_time_max_s, "spec");
  s.settling_time_max_s = get_or<double>(sj, "settling_time_max_s", s.settling_time_max_s, "spec");
  s.overshoot_max_fraction = get_or<double>(sj, "overshoot_max_fraction", s.overshoot_max_fraction, "spec");
  s.phase_margin_min_deg = get_or<double>(sj, "phase_margin_min_deg", s.phase_margin_min_deg, "spec");
  s.steady_state_error_max_fraction =
      get_or<double>(sj, "steady_state_error_max_fraction", s.steady_state_error_max_fraction, "spec");
  s.settling_band_fraction = get_or<double>(sj, "settling_band_fraction", s.settling_band_fraction, "spec");

  const std::string out = get_or<std::string>(j, "output_dir", "out", "config");
  c.output_dir = fs::path(out).is_relative() ? config_dir / out : fs::path(out);

  s.validate();
  ls.validate();
  if (c.reduction_grid < 2 || c.margin_grid < 2) throw ConfigError("grid sizes must be at least 2");
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return parse_config(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

json config_to_json(const PipelineConfig& c) {
  json plant;
  if (c.plant.model) {
    plant = tf_to_json(*c.plant.model);
  } else {
    plant = {{"command", c.plant.command}};
  }
  const auto& ls = c.loopshape;
  const auto& inv = ls.inverse;
  json shaping = nullptr;
  if (inv.reference_shaping)
    shaping = {{"cutoff_normalized", inv.reference_shaping->cutoff_normalized},
               {"half_length", inv.reference_shaping->half_length}};
  return {{"sample_rate_hz", c.sample_rate_hz},
          {"plant", plant},
          {"desired_loop_gain", tf_to_json(c.desired_loop_gain)},
          {"horizon", ls.horizon},
          {"loopshape",
           {{"truncation_threshold", ls.truncation_threshold},
            {"slow_pole_radius", ls.slow_pole_radius},
            {"frequency_weighting", ls.frequency_weighting},
            {"anticausal_margin", ls.anticausal_margin},
            {"probe_length", ls.probe_length},
            {"anticausal_energy_limit", ls.anticausal_energy_limit}}},
          {"inverse_learning",
           {{"filter_half_length", inv.filter_half_length},
            {"total_iterations", inv.total_iterations},
            {"cross_update_period", inv.cross_update_period},
            {"cross_update", inv.cross_update},
            {"initial_gain_alpha", inv.initial_gain_alpha},
            {"reference_shaping", shaping},
            {"stop_error_db", inv.stop_error_db}}},
          {"ilc",
           {{"max_iterations", ls.ilc.max_iterations},
            {"stop_error_db", ls.ilc.stop_error_db},
            {"divergence_factor", ls.ilc.divergence_factor}}},
          {"reduction",
           {{"energy_fraction", c.reduction.energy_fraction},
            {"order", c.reduction.order ? json(*c.reduction.order) : json(nullptr)},
            {"grid_size", c.reduction_grid}}},
          {"validation",
           {{"horizon_s", c.validation_horizon_s},
            {"grid_size", c.margin_grid},
            {"spec",
             {{"rise_time_max_s", c.spec.rise_time_max_s},
              {"settling_time_max_s", c.spec.settling_time_max_s},
              {"overshoot_max_fraction", c.spec.overshoot_max_fraction},
              {"phase_margin_min_deg", c.spec.phase_margin_min_deg},
              {"steady_state_error_max_fraction", c.spec.steady_state_error_max_fraction},
              {"settling_band_fraction", c.spec.settling_band_fraction}}}}}};
}

std::unique_ptr<PlantOracle> make_oracle(const PipelineConfig& c) {
  if (c.plant.model) return std::make_unique<SimulatedPlant>(*c.plant.model);
  return std::make_unique<ProcessPlant>(c.plant.command, c.sample_rate_hz);
}

// ---------------------------------------------------------------- artifacts

namespace {

class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError(fmt::format("cannot create output directory {}: {}", dir_.string(), ec.message()));
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    out << content;
    if (!out) throw ConfigError("cannot write " + (dir_ / name).string());
    outputs_.push_back({{"file", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void manifest(const std::string& command, const RunOptions& opts, const PipelineConfig& cfg,
                const std::string& config_text) {
    json m = {{"command", command},
              {"config_file", opts.config_path.filename().string()},
              {"config_sha256", sha256_hex(config_text)},
              {"parameters", config_to_json(cfg)},
              {"outputs", outputs_}};
    const std::string name = fmt::format("manifest_{}.json", command);
    std::ofstream out(dir_ / name, std::ios::binary);
    out << m.dump(2) << "\n";
    if (!out) throw ConfigError("cannot write " + (dir_ / name).string());
  }

 private:
  fs::path dir_;
  json outputs_ = json::array();
};

std::string to_csv(const Sequence& x) {
  std::ostringstream os;
  write_sequence_csv(os, x);
  return os.str();
}

std::string to_csv(const TwoSidedFir& f, double fs) {
  std::ostringstream os;
  write_fir_csv(os, f, fs);
  return os.str();
}

std::string curve_csv(const std::vector<double>& history, double reference_norm) {
  std::ostringstream os;
  write_learning_curve(os, history, reference_norm);
  return os.str();
}

json db_or_null(double v) { return v > 0.0 ? json(to_db(v)) : json(nullptr); }

// Intermediate results shared by the steps of one invocation.
struct Context {
  const PipelineConfig& cfg;
  std::unique_ptr<PlantOracle> oracle;
  std::optional<LoopShapeResult> shape;
  std::optional<ReductionResult> reduction;
  std::optional<RationalTf> controller;  // C_IIR(z) H(z)

  PlantOracle& plant() {
    if (!oracle) oracle = make_oracle(cfg);
    return *oracle;
  }

  const LoopShapeResult& shaped() {
    if (!shape) shape = run_loopshaping(plant(), cfg.desired_loop_gain, cfg.loopshape);
    return *shape;
  }

  const ReductionResult& reduced() {
    if (!reduction) {
      reduction = balanced_reduce(shaped().controller_fir, cfg.reduction, cfg.sample_rate_hz, cfg.reduction_grid);
      controller = is_unity(shape->weight) ? reduction->reduced : series_minimal(reduction->reduced, shape->weight);
    }
    return *reduction;
  }

  // L_IIR at e^{jω}: exact product when the plant model is known, otherwise
  // the DTFT of the loop impulse response measured through the plant.
  std::function<Complex(double)> loop_iir() {
    reduced();
    if (cfg.plant.model) {
      const RationalTf c = *controller;
      const RationalTf p = *cfg.plant.model;
      return [c, p](double w) { return freq_response(c, w) * freq_response(p, w); };
    }
    const Sequence l = measured_loop_impulse(cfg.loopshape.horizon);
    return [l](double w) { return l.dtft(w); };
  }

  Sequence measured_loop_impulse(std::size_t length) {
    const Sequence c = impulse_response(*controller, length);
    return plant().run_trial(c);
  }
};

// ---------------------------------------------------------------- steps

void step_probe(Context& ctx, Artifacts& out) {
  const auto& cfg = ctx.cfg;
  const std::size_t n = cfg.loopshape.probe_length;
  const int order = probe_relative_order(ctx.plant(), n);
  const Sequence impulse = measure_impulse(ctx.plant(), n);
  double peak = 0.0, tail = 0.0;
  const std::size_t tail_len = std::max<std::size_t>(1, n / 20);
  for (std::size_t k = 0; k < n; ++k) {
    peak = std::max(peak, std::abs(impulse[k]));
    if (k >= n - tail_len) tail = std::max(tail, std::abs(impulse[k]));
  }
  out.write("impulse.csv", to_csv(impulse));
  out.write_json("probe.json", {{"relative_order", order},
                                {"length", n},
                                {"peak_magnitude", peak},
                                {"tail_max_magnitude", tail},
                                {"tail_ratio", peak > 0.0 ? tail / peak : 0.0}});
  fmt::print("probe: relative order {}, impulse tail/peak {:.3e}\n", order, peak > 0.0 ? tail / peak : 0.0);
}

void write_inverse(const InverseLearnResult& inv, double fs, Artifacts& out) {
  const double rn = inv.tracking.reference_norm;
  const auto& h = inv.tracking.error_l2_history;
  const double final_err = h.empty() ? 0.0 : h.back();
  const double len = static_cast<double>(inv.filter.size());
  json summary = {{"iterations", inv.tracking.iterations_run},
                  {"final_error_l2", final_err},
                  {"final_rms_error", final_err / std::sqrt(len)},
                  {"filter_taps", inv.filter.size()},
                  {"filter_anchor", inv.filter.anchor()}};
  if (h.size() >= 2) {
    const std::size_t from = h.size() > 11 ? h.size() - 11 : 0;
    try {
      summary["convergence_rate_last10"] =
          empirical_convergence_rate(std::vector<double>(h.begin() + static_cast<std::ptrdiff_t>(from), h.end()),
                                     1e-13 * rn);
    } catch (const std::invalid_argument&) {
      summary["convergence_rate_last10"] = 0.0;  // already at the rounding floor
    }
  }
  out.write("inverse_filter.csv", to_csv(inv.filter, fs));
  out.write("inverse_learning_curve.csv", curve_csv(h, rn));
  out.write_json("inverse.json", summary);
  fmt::print("learn-inverse: {} iterations, final RMS error {:.3e}\n", inv.tracking.iterations_run,
             final_err / std::sqrt(len));
}

void step_learn_inverse(Context& ctx, Artifacts& out) {
  write_inverse(learn_inverse(ctx.plant(), ctx.cfg.loopshape.inverse), ctx.cfg.sample_rate_hz, out);
}

void step_shape(Context& ctx, Artifacts& out, bool with_inverse) {
  const auto& s = ctx.shaped();
  const double fs = ctx.cfg.sample_rate_hz;
  if (with_inverse) write_inverse(s.inverse, fs, out);
  const Sequence& r = s.reference.reference;
  const double rn = l2_norm(r);
  const auto& h = s.tracking.error_l2_history;

  std::ostringstream track;
  track << "k,t_s,reference,output,error,input\n";
  const Sequence& y = s.tracking.final_output;
  const Sequence& u = s.tracking.learned_input;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const Index k = static_cast<Index>(i) - y.anchor();
    const double ref = r.at_time(k);
    track << fmt::format("{},{},{},{},{},{}\n", k, format_real(static_cast<double>(k) / fs), format_real(ref),
                         format_real(y[i]), format_real(ref - y[i]), format_real(u[i]));
  }

  out.write("controller_fir.csv", to_csv(s.controller_fir, fs));
  out.write_json("weight.json", tf_to_json(s.weight));
  out.write_json("target_prime.json", tf_to_json(s.target_prime));
  out.write("tracking_curve.csv", curve_csv(h, rn));
  out.write("tracking.csv", track.str());
  json summary = {{"relative_order_plant", s.relative_order_plant},
                  {"relative_order_target", s.relative_order_target},
                  {"iterations", s.tracking.iterations_run},
                  {"final_error_l2", h.empty() ? 0.0 : h.back()},
                  {"final_error_db", h.empty() ? json(nullptr) : db_or_null(h.back() / rn)},
                  {"controller_taps", s.controller_fir.size()},
                  {"controller_anchor", s.controller_fir.anchor()},
                  {"taps_dropped", s.taps_dropped},
                  {"anticausal_energy_fraction", s.controller_fir.anticausal_energy_fraction()},
                  {"reference_tail_ratio", s.reference.diagnostics.tail_ratio},
                  {"reference_settled", s.reference.diagnostics.settled}};
  double max_err = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    max_err = std::max(max_err, std::abs(r.at_time(static_cast<Index>(i) - y.anchor()) - y[i]));
  summary["max_abs_tracking_error"] = max_err;
  out.write_json("shape.json", summary);
  if (!s.reference.diagnostics.settled) fmt::print("warning: {}\n", s.reference.diagnostics.message);
  fmt::print("shape: plant order {}, target order {}, final relative error {} dB, max error {:.3e}\n",
             s.relative_order_plant, s.relative_order_target,
             h.empty() || h.back() == 0.0 ? std::string("-inf") : fmt::format("{:.1f}", to_db(h.back() / rn)),
             max_err);
}

void step_reduce(Context& ctx, Artifacts& out) {
  const auto& red = ctx.reduced();
  const auto& cfg = ctx.cfg;
  const auto& s = *ctx.shape;
  const auto loop = ctx.loop_iir();
  const auto& ld = cfg.desired_loop_gain;
  const GridError lerr =
      grid_hinf_error([&](double w) { return freq_response(ld, w); }, loop, cfg.reduction_grid);

  json j = reduction_to_json(red);
  j["controller"] = tf_to_json(*ctx.controller);
  j["loop_error"] = lerr.value;
  j["loop_error_db"] = db_or_null(lerr.value);
  j["loop_error_hz"] = lerr.omega * cfg.sample_rate_hz / (2.0 * std::numbers::pi);
  out.write_json("reduction.json", j);

  std::ostringstream sv;
  sv << "k,sigma\n";
  for (std::size_t k = 0; k < red.hankel_singular_values.size(); ++k)
    sv << fmt::format("{},{}\n", k + 1, format_real(red.hankel_singular_values[k]));
  out.write("hankel_singular_values.csv", sv.str());

  std::ostringstream bode;
  bode << "f_hz,ld_mag_db,ld_phase_deg,liir_mag_db,liir_phase_deg,loop_error_db,cfir_mag_db,ciir_mag_db\n";
  auto mag_db = [](Complex v) { return 20.0 * std::log10(std::abs(v)); };
  auto deg = [](Complex v) { return std::arg(v) * 180.0 / std::numbers::pi; };
  for (double w : frequency_grid(cfg.reduction_grid, false)) {
    const Complex a = freq_response(ld, w);
    const Complex b = loop(w);
    bode << fmt::format("{},{},{},{},{},{},{},{}\n", format_real(w * cfg.sample_rate_hz / (2.0 * std::numbers::pi)),
                        format_real(mag_db(a)), format_real(deg(a)), format_real(mag_db(b)), format_real(deg(b)),
                        format_real(mag_db(a - b)), format_real(mag_db(s.controller_fir.response(w))),
                        format_real(mag_db(freq_response(red.reduced, w))));
  }
  out.write("bode.csv", bode.str());
  fmt::print("reduce: order {}, bound {:.4f} ({} dB), controller grid error {:.3e}, loop error {} dB\n", red.order,
             red.error_bound, red.error_bound > 0 ? fmt::format("{:.2f}", to_db(red.error_bound)) : "-inf",
             red.measured_grid_error, lerr.value > 0 ? fmt::format("{:.1f}", to_db(lerr.value)) : "-inf");
}

struct LoopMetrics {
  StepMetrics metrics;
  Sequence step;
};

LoopMetrics evaluate_rational(const RationalTf& loop, const std::function<Complex(double)>& freq,
                              const PipelineConfig& cfg) {
  const RationalTf g = closed_loop(loop);
  const auto n = static_cast<std::size_t>(std::llround(cfg.validation_horizon_s * cfg.sample_rate_hz));
  LoopMetrics out{step_metrics(g, cfg.validation_horizon_s, cfg.spec.settling_band_fraction), step_response(g, n)};
  const Margins m = stability_margins(freq, cfg.sample_rate_hz, cfg.margin_grid);
  out.metrics.phase_margin_deg = m.phase_margin_deg;
  out.metrics.gain_crossover_hz = m.gain_crossover_hz;
  return out;
}

int step_validate(Context& ctx, Artifacts& out) {
  const auto& cfg = ctx.cfg;
  const auto& ld = cfg.desired_loop_gain;
  const LoopMetrics desired = evaluate_rational(ld, [&](double w) { return freq_response(ld, w); }, cfg);

  ctx.reduced();
  LoopMetrics iir;
  if (cfg.plant.model) {
    const RationalTf loop = series_minimal(*ctx.controller, *cfg.plant.model);
    iir = evaluate_rational(loop, ctx.loop_iir(), cfg);
  } else {
    const auto n = static_cast<std::size_t>(std::llround(cfg.validation_horizon_s * cfg.sample_rate_hz));
    iir.step = closed_loop_step_from_impulse(ctx.measured_loop_impulse(n));
    iir.metrics = step_metrics_from_response(iir.step, cfg.spec.settling_band_fraction);
    const Margins m = stability_margins(ctx.loop_iir(), cfg.sample_rate_hz, cfg.margin_grid);
    iir.metrics.phase_margin_deg = m.phase_margin_deg;
    iir.metrics.gain_crossover_hz = m.gain_crossover_hz;
  }

  const SpecReport rd = check_specs(desired.metrics, cfg.spec);
  const SpecReport ri = check_specs(iir.metrics, cfg.spec);
  std::ostringstream sd, si;
  write_step_csv(sd, desired.step);
  write_step_csv(si, iir.step);
  out.write("step_desired.csv", sd.str());
  out.write("step_iir.csv", si.str());
  out.write_json("report.json", {{"desired", {{"metrics", metrics_to_json(desired.metrics)}, {"spec", report_to_json(rd)}}},
                                 {"iir", {{"metrics", metrics_to_json(iir.metrics)}, {"spec", report_to_json(ri)}}},
                                 {"pass", ri.pass}});
  for (const auto& [label, m] : {std::pair{"G_d  ", desired.metrics}, std::pair{"G_IIR", iir.metrics}})
    fmt::print("validate {}: t_r {:.3f} ms, t_s {:.3f} ms, M_p {:.3f}%, PM {:.2f} deg, e_ss {:.3f}%\n", label,
               m.rise_time_s * 1e3, m.settling_time_s * 1e3, m.overshoot_fraction * 100, m.phase_margin_deg,
               m.steady_state_error_fraction * 100);
  fmt::print("validate: specs {}\n", ri.pass ? "met" : "NOT met");
  return ri.pass ? 0 : 2;
}

}  // namespace

int run_command(const std::string& command, const RunOptions& options) {
  std::ifstream in(options.config_path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + options.config_path.string());
  std::ostringstream text;
  text << in.rdbuf();

  PipelineConfig cfg = load_config(options.config_path);
  if (options.output_dir) cfg.output_dir = *options.output_dir;
  if (options.horizon) {
    if (*options.horizon < 2 || *options.horizon % 2 != 0) throw ConfigError("--horizon must be a positive even integer");
    cfg.loopshape.horizon = *options.horizon;
    cfg.loopshape.inverse.filter_half_length = *options.horizon / 2;
    cfg.loopshape.validate();
  }

  Context ctx{cfg, nullptr, std::nullopt, std::nullopt, std::nullopt};
  Artifacts out(cfg.output_dir);
  int code = 0;
  if (command == "probe") {
    step_probe(ctx, out);
  } else if (command == "learn-inverse") {
    step_learn_inverse(ctx, out);
  } else if (command == "shape") {
    step_shape(ctx, out, false);
  } else if (command == "reduce") {
    step_reduce(ctx, out);
  } else if (command == "validate") {
    code = step_validate(ctx, out);
  } else if (command == "full") {
    step_probe(ctx, out);
    step_shape(ctx, out, true);
    step_reduce(ctx, out);
    code = step_validate(ctx, out);
  } else {
    throw ConfigError("unknown command " + command);
  }
  out.manifest(command, options, cfg, text.str());
  return code;
}

}  // namespace ilcshape::app
