#include "epr/config.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "epr/errors.hpp"

namespace epr {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

class KeyValueMap {
 public:
  explicit KeyValueMap(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string stripped = trim(line);
      if (stripped.empty()) continue;
      const auto eq = stripped.find('=');
      if (eq == std::string::npos) {
        throw ValidationError("config line " + std::to_string(lineno) +
                              ": expected 'key = value', got '" + stripped + "'");
      }
      const std::string key = trim(stripped.substr(0, eq));
      const std::string value = trim(stripped.substr(eq + 1));
      if (key.empty()) {
        throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
      }
      if (!values_.emplace(key, value).second) {
        throw ValidationError("config: duplicate key '" + key + "'");
      }
    }
  }

  double number(const std::string& key, double fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert({key, true});
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw ValidationError("config: key '" + key + "' has non-numeric value '" + it->second +
                            "'");
    }
  }

  long integer(const std::string& key, long fallback) {
    const double v = number(key, static_cast<double>(fallback));
    const auto l = static_cast<long>(v);
    if (static_cast<double>(l) != v) {
      throw ValidationError("config: key '" + key + "' must be an integer");
    }
    return l;
  }

  // full 64-bit range, no round trip through double
  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert({key, true});
    try {
      std::size_t pos = 0;
      const std::uint64_t v = std::stoull(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw ValidationError("config: key '" + key + "' must be an unsigned integer, got '" +
                            it->second + "'");
    }
  }

  bool flag(const std::string& key, bool fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert({key, true});
    const std::string& v = it->second;
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw ValidationError("config: key '" + key + "' must be on/off/true/false/1/0, got '" + v +
                          "'");
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert({key, true});
    return it->second;
  }

  void check_all_consumed() const {
    for (const auto& [key, value] : values_) {
      if (consumed_.find(key) == consumed_.end()) {
        throw ValidationError("config: unknown key '" + key + "'");
      }
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> consumed_;
};

std::vector<SpectralPeak> parse_peaks(const std::string& text) {
  std::vector<SpectralPeak> peaks;
  if (trim(text).empty()) return peaks;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ValidationError("config: synth.peaks entries must look like freq:amplitude, got '" +
                            item + "'");
    }
    try {
      peaks.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    } catch (const std::exception&) {
      throw ValidationError("config: cannot parse synth.peaks entry '" + item + "'");
    }
  }
  return peaks;
}

std::string format_peaks(const std::vector<SpectralPeak>& peaks) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    if (i > 0) os << ",";
    os << peaks[i].freq_hz << ":" << peaks[i].amplitude;
  }
  return os.str();
}

void check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError("config: " + field + " " + what);
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.model.cavity = CavityParams{};
  c.model.eff.ch1 = {852.0, 0.983, 0.990, 0.984, 0.96};
  c.model.eff.ch2 = {1064.0, 0.987, 0.991, 0.989, 0.93};
  c.model.pump.sigma = 0.25;
  c.model.phase_noise = {0.0203, 1000.0};

  c.synth.model = c.model;
  c.synth.sample_rate_hz = 5.0e6;
  c.synth.duration_s = 3.2;
  c.synth.lo_angles = QuadratureAngles(0.0, 0.0);
  c.synth.seed = 20220852;
  c.synth.electronic_noise_enabled = true;
  c.synth.electronic_noise_db = -18.5;
  c.synth.cmrr_db = 40.0;
  c.synth.lo_noise = LoClassicalNoise{};
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  KeyValueMap kv(text);
  ExperimentConfig d = default_config();
  ExperimentConfig c;

  c.model.cavity.length_m = kv.number("cavity.length_m", d.model.cavity.length_m);
  c.model.cavity.output_coupler_T =
      kv.number("cavity.output_coupler_transmission", d.model.cavity.output_coupler_T);
  c.model.cavity.loss_ch1 = kv.number("cavity.loss_ch1", d.model.cavity.loss_ch1);
  c.model.cavity.loss_ch2 = kv.number("cavity.loss_ch2", d.model.cavity.loss_ch2);
  c.model.cavity.bandwidth_hz = kv.number("cavity.bandwidth_hz", d.model.cavity.bandwidth_hz);
  c.model.cavity.fsr_hz = kv.number("cavity.fsr_hz", d.model.cavity.fsr_hz);
  c.model.cavity.finesse = kv.number("cavity.finesse", d.model.cavity.finesse);
  c.model.cavity.threshold_power_w =
      kv.number("cavity.threshold_power_w", d.model.cavity.threshold_power_w);

  auto channel = [&](const std::string& prefix, const ChannelEfficiency& dd) {
    ChannelEfficiency e;
    e.lambda_nm = kv.number(prefix + ".lambda_nm", dd.lambda_nm);
    e.esc = kv.number(prefix + ".esc", dd.esc);
    e.pro = kv.number(prefix + ".pro", dd.pro);
    e.mm = kv.number(prefix + ".mm", dd.mm);
    e.det = kv.number(prefix + ".det", dd.det);
    return e;
  };
  c.model.eff.ch1 = channel("eff.ch1", d.model.eff.ch1);
  c.model.eff.ch2 = channel("eff.ch2", d.model.eff.ch2);

  const double power = kv.number("pump.power_w", -1.0);
  const double sigma = kv.number("pump.sigma", power >= 0.0 ? -1.0 : d.model.pump.sigma);
  if (sigma >= 0.0 && power >= 0.0) {
    throw ValidationError("config: give pump.sigma or pump.power_w, not both");
  }
  c.model.pump.sigma = sigma;  // range-checked in validate_config

  c.model.phase_noise.rms_rad = kv.number("phase_noise.rms_rad", d.model.phase_noise.rms_rad);
  c.model.phase_noise.corner_hz =
      kv.number("phase_noise.corner_hz", d.model.phase_noise.corner_hz);

  c.synth.sample_rate_hz = kv.number("synth.sample_rate_hz", d.synth.sample_rate_hz);
  c.synth.duration_s = kv.number("synth.duration_s", d.synth.duration_s);
  c.synth.lo_angles = QuadratureAngles(kv.number("synth.lo_theta1_rad", 0.0),
                                       kv.number("synth.lo_theta2_rad", 0.0));
  c.synth.seed = kv.seed("synth.seed", d.synth.seed);
  c.synth.electronic_noise_enabled =
      kv.flag("synth.electronic_noise", d.synth.electronic_noise_enabled);
  c.synth.electronic_noise_db =
      kv.number("synth.electronic_noise_db", d.synth.electronic_noise_db);
  c.synth.cmrr_db = kv.number("synth.cmrr_db", d.synth.cmrr_db);
  c.synth.lo_noise.enabled = kv.flag("synth.lo_noise", d.synth.lo_noise.enabled);
  c.synth.lo_noise.flat_db = kv.number("synth.lo_noise_flat_db", d.synth.lo_noise.flat_db);
  c.synth.lo_noise.corner_hz = kv.number("synth.lo_noise_corner_hz", d.synth.lo_noise.corner_hz);
  c.synth.lo_noise.clamp_hz = kv.number("synth.lo_noise_clamp_hz", d.synth.lo_noise.clamp_hz);
  c.synth.peaks = parse_peaks(kv.text("synth.peaks", ""));

  c.analysis.demod_freq_hz = kv.number("analysis.demod_freq_hz", d.analysis.demod_freq_hz);
  c.analysis.lpf_cutoff_hz = kv.number("analysis.lpf_cutoff_hz", d.analysis.lpf_cutoff_hz);
  c.analysis.fft_length = static_cast<int>(kv.integer("analysis.fft_length", d.analysis.fft_length));
  c.analysis.n_averages = static_cast<int>(kv.integer("analysis.n_averages", d.analysis.n_averages));
  const std::string window = kv.text("analysis.window", "rect");
  if (window == "rect") {
    c.analysis.window = WelchWindow::rectangular;
  } else if (window == "hann") {
    c.analysis.window = WelchWindow::hann;
  } else {
    throw ValidationError("config: analysis.window must be rect or hann, got '" + window + "'");
  }
  c.analysis.band_lo_hz = kv.number("analysis.band_lo_hz", d.analysis.band_lo_hz);
  c.analysis.band_hi_hz = kv.number("analysis.band_hi_hz", d.analysis.band_hi_hz);
  c.analysis.electronic_correction =
      kv.flag("analysis.electronic_correction", d.analysis.electronic_correction);
  c.analysis.mad_threshold = kv.number("analysis.mad_threshold", d.analysis.mad_threshold);
  c.analysis.per_bin_gain = kv.flag("analysis.per_bin_gain", d.analysis.per_bin_gain);

  c.labels.ch1 = kv.text("report.label_ch1", d.labels.ch1);
  c.labels.ch2 = kv.text("report.label_ch2", d.labels.ch2);

  kv.check_all_consumed();

  if (c.model.pump.sigma < 0.0 && power >= 0.0) {
    check(c.model.cavity.threshold_power_w > 0.0, "cavity.threshold_power_w",
          "must be positive to derive sigma from pump.power_w");
    c.model.pump.sigma = power / c.model.cavity.threshold_power_w;
  }

  c.synth.model = c.model;
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "# two-colour EPR experiment configuration\n\n";
  os << "# NOPO cavity\n";
  os << "cavity.length_m = " << c.model.cavity.length_m << "\n";
  os << "cavity.output_coupler_transmission = " << c.model.cavity.output_coupler_T << "\n";
  os << "cavity.loss_ch1 = " << c.model.cavity.loss_ch1 << "\n";
  os << "cavity.loss_ch2 = " << c.model.cavity.loss_ch2 << "\n";
  os << "cavity.bandwidth_hz = " << c.model.cavity.bandwidth_hz << "\n";
  os << "cavity.fsr_hz = " << c.model.cavity.fsr_hz << "\n";
  os << "cavity.finesse = " << c.model.cavity.finesse << "\n";
  os << "cavity.threshold_power_w = " << c.model.cavity.threshold_power_w << "\n";
  os << "\n# efficiency chain (ch1 = signal, ch2 = idler)\n";
  auto channel = [&](const char* prefix, const ChannelEfficiency& e) {
    os << prefix << ".lambda_nm = " << e.lambda_nm << "\n";
    os << prefix << ".esc = " << e.esc << "\n";
    os << prefix << ".pro = " << e.pro << "\n";
    os << prefix << ".mm = " << e.mm << "\n";
    os << prefix << ".det = " << e.det << "\n";
  };
  channel("eff.ch1", c.model.eff.ch1);
  channel("eff.ch2", c.model.eff.ch2);
  os << "\n# pump\n";
  os << "pump.sigma = " << c.model.pump.sigma << "\n";
  os << "\n# phase noise\n";
  os << "phase_noise.rms_rad = " << c.model.phase_noise.rms_rad << "\n";
  os << "phase_noise.corner_hz = " << c.model.phase_noise.corner_hz << "\n";
  os << "\n# synthesis\n";
  os << "synth.sample_rate_hz = " << c.synth.sample_rate_hz << "\n";
  os << "synth.duration_s = " << c.synth.duration_s << "\n";
  os << "synth.lo_theta1_rad = " << c.synth.lo_angles.theta1 << "\n";
  os << "synth.lo_theta2_rad = " << c.synth.lo_angles.theta2 << "\n";
  os << "synth.seed = " << c.synth.seed << "\n";
  os << "synth.electronic_noise = " << (c.synth.electronic_noise_enabled ? "on" : "off") << "\n";
  os << "synth.electronic_noise_db = " << c.synth.electronic_noise_db << "\n";
  os << "synth.cmrr_db = " << c.synth.cmrr_db << "\n";
  os << "synth.lo_noise = " << (c.synth.lo_noise.enabled ? "on" : "off") << "\n";
  os << "synth.lo_noise_flat_db = " << c.synth.lo_noise.flat_db << "\n";
  os << "synth.lo_noise_corner_hz = " << c.synth.lo_noise.corner_hz << "\n";
  os << "synth.lo_noise_clamp_hz = " << c.synth.lo_noise.clamp_hz << "\n";
  os << "synth.peaks = " << format_peaks(c.synth.peaks) << "\n";
  os << "\n# analysis\n";
  os << "analysis.demod_freq_hz = " << c.analysis.demod_freq_hz << "\n";
  os << "analysis.lpf_cutoff_hz = " << c.analysis.lpf_cutoff_hz << "\n";
  os << "analysis.fft_length = " << c.analysis.fft_length << "\n";
  os << "analysis.n_averages = " << c.analysis.n_averages << "\n";
  os << "analysis.window = " << (c.analysis.window == WelchWindow::hann ? "hann" : "rect") << "\n";
  os << "analysis.band_lo_hz = " << c.analysis.band_lo_hz << "\n";
  os << "analysis.band_hi_hz = " << c.analysis.band_hi_hz << "\n";
  os << "analysis.electronic_correction = " << (c.analysis.electronic_correction ? "on" : "off")
     << "\n";
  os << "analysis.mad_threshold = " << c.analysis.mad_threshold << "\n";
  os << "analysis.per_bin_gain = " << (c.analysis.per_bin_gain ? "on" : "off") << "\n";
  os << "\n# report\n";
  os << "report.label_ch1 = " << c.labels.ch1 << "\n";
  os << "report.label_ch2 = " << c.labels.ch2 << "\n";
  return os.str();
}

void validate_config(const ExperimentConfig& c) {
  check(c.model.cavity.length_m > 0.0, "cavity.length_m", "must be positive");
  check(c.model.cavity.output_coupler_T > 0.0 && c.model.cavity.output_coupler_T <= 1.0,
        "cavity.output_coupler_transmission", "must lie in (0, 1]");
  check(c.model.cavity.loss_ch1 >= 0.0, "cavity.loss_ch1", "must be non-negative");
  check(c.model.cavity.loss_ch2 >= 0.0, "cavity.loss_ch2", "must be non-negative");
  check(c.model.cavity.bandwidth_hz > 0.0, "cavity.bandwidth_hz", "must be positive");
  check(c.model.cavity.fsr_hz > 0.0, "cavity.fsr_hz", "must be positive");
  check(c.model.cavity.threshold_power_w > 0.0, "cavity.threshold_power_w", "must be positive");

  auto channel = [](const ChannelEfficiency& e, const std::string& prefix) {
    check(e.valid(), prefix, "efficiency factors must lie in [0, 1]");
  };
  channel(c.model.eff.ch1, "eff.ch1");
  channel(c.model.eff.ch2, "eff.ch2");

  check(c.model.pump.sigma >= 0.0 && c.model.pump.sigma < 1.0, "pump.sigma",
        "must satisfy 0 <= sigma < 1 (below threshold)");
  check(c.model.phase_noise.rms_rad >= 0.0, "phase_noise.rms_rad", "must be non-negative");
  check(c.model.phase_noise.corner_hz > 0.0, "phase_noise.corner_hz", "must be positive");

  check(c.synth.sample_rate_hz > 0.0, "synth.sample_rate_hz", "must be positive");
  check(c.synth.duration_s > 0.0, "synth.duration_s", "must be positive");
  check(c.synth.duration_s * c.synth.sample_rate_hz <= 9.0e15, "synth.duration_s",
        "trace length overflows the sample counter");
  check(c.synth.cmrr_db >= 0.0, "synth.cmrr_db", "must be non-negative");
  check(c.synth.lo_noise.corner_hz > 0.0, "synth.lo_noise_corner_hz", "must be positive");
  check(c.synth.lo_noise.clamp_hz > 0.0, "synth.lo_noise_clamp_hz", "must be positive");
  for (const auto& p : c.synth.peaks) {
    check(p.freq_hz > 0.0 && p.freq_hz < 0.5 * c.synth.sample_rate_hz, "synth.peaks",
          "peak frequencies must lie inside (0, sample_rate/2)");
  }

  check(c.analysis.demod_freq_hz > 0.0, "analysis.demod_freq_hz", "must be positive");
  check(c.analysis.lpf_cutoff_hz > 0.0, "analysis.lpf_cutoff_hz", "must be positive");
  check(c.analysis.demod_freq_hz + c.analysis.lpf_cutoff_hz < 0.5 * c.synth.sample_rate_hz,
        "analysis.demod_freq_hz", "demod band must stay below sample_rate/2");
  check(c.analysis.fft_length >= 8, "analysis.fft_length", "must be at least 8");
  check(c.analysis.n_averages >= 1, "analysis.n_averages", "must be at least 1");
  check(c.analysis.band_lo_hz >= 0.0, "analysis.band_lo_hz", "must be non-negative");
  check(c.analysis.band_lo_hz < c.analysis.band_hi_hz, "analysis.band_lo_hz",
        "must be below analysis.band_hi_hz");
  check(c.analysis.band_hi_hz <= 0.5 * c.synth.sample_rate_hz, "analysis.band_hi_hz",
        "must not exceed sample_rate/2");
}

}  // namespace epr
