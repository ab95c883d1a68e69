#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "epr/analysis.hpp"
#include "epr/commands.hpp"
#include "epr/config.hpp"
#include "epr/dsp.hpp"
#include "epr/errors.hpp"
#include "epr/gaussian.hpp"
#include "epr/nopo.hpp"
#include "epr/synth.hpp"
#include "epr/trace_io.hpp"
#include "epr/units.hpp"

namespace py = pybind11;
using namespace epr;

namespace {

py::array_t<double> matrix_to_array(const Eigen::Matrix4d& m) {
  py::array_t<double> out({4, 4});
  auto r = out.mutable_unchecked<2>();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r(i, j) = m(i, j);
  return out;
}

CovarianceMatrix matrix_from_array(const py::array_t<double>& a) {
  if (a.ndim() != 2 || a.shape(0) != 4 || a.shape(1) != 4) {
    throw ValidationError("covariance matrix must be 4x4");
  }
  Eigen::Matrix4d m;
  auto r = a.unchecked<2>();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = r(i, j);
  return CovarianceMatrix::from_matrix(m);
}

py::array_t<double> vector_to_array(const std::vector<double>& v) {
  py::array_t<double> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())},
                          std::vector<py::ssize_t>{sizeof(double)});
  std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-colour EPR entanglement simulator: Gaussian-state operations, "
            "NOPO noise spectra, trace synthesis and the homodyne analysis chain.";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_IOError);

  m.def("to_db", &to_db, py::arg("linear"));
  m.def("from_db", &from_db, py::arg("db"));

  py::enum_<Quad>(m, "Quad")
      .value("x1", Quad::x1)
      .value("y1", Quad::y1)
      .value("x2", Quad::x2)
      .value("y2", Quad::y2);

  py::enum_<Physicality>(m, "Physicality")
      .value("physical", Physicality::physical)
      .value("marginal", Physicality::marginal)
      .value("unphysical", Physicality::unphysical);

  py::class_<TwoModeVariances>(m, "TwoModeVariances")
      .def(py::init<>())
      .def(py::init([](double xm, double xp, double ym, double yp) {
             return TwoModeVariances{xm, xp, ym, yp};
           }),
           py::arg("x_minus"), py::arg("x_plus"), py::arg("y_minus"), py::arg("y_plus"))
      .def_readwrite("x_minus", &TwoModeVariances::x_minus)
      .def_readwrite("x_plus", &TwoModeVariances::x_plus)
      .def_readwrite("y_minus", &TwoModeVariances::y_minus)
      .def_readwrite("y_plus", &TwoModeVariances::y_plus)
      .def("heisenberg_ok", &TwoModeVariances::heisenberg_ok)
      .def("__repr__", [](const TwoModeVariances& v) {
        return "TwoModeVariances(x_minus=" + std::to_string(v.x_minus) +
               ", x_plus=" + std::to_string(v.x_plus) + ", y_minus=" + std::to_string(v.y_minus) +
               ", y_plus=" + std::to_string(v.y_plus) + ")";
      });

  py::class_<QuadratureAngles>(m, "QuadratureAngles")
      .def(py::init<double, double>(), py::arg("theta1"), py::arg("theta2"))
      .def_readonly("theta1", &QuadratureAngles::theta1)
      .def_readonly("theta2", &QuadratureAngles::theta2);

  py::class_<CovarianceMatrix>(m, "CovarianceMatrix")
      .def_static("vacuum", &CovarianceMatrix::vacuum)
      .def_static("from_matrix", &matrix_from_array, py::arg("matrix"))
      .def("matrix", [](const CovarianceMatrix& cm) { return matrix_to_array(cm.matrix()); })
      .def("var", &CovarianceMatrix::var, py::arg("quad"))
      .def("cov", &CovarianceMatrix::cov, py::arg("a"), py::arg("b"))
      .def("determinant", &CovarianceMatrix::determinant)
      .def("positive_definite", &CovarianceMatrix::positive_definite)
      .def("symplectic_eigenvalues",
           [](const CovarianceMatrix& cm) {
             const auto nu = cm.symplectic_eigenvalues();
             return py::make_tuple(nu[0], nu[1]);
           })
      .def("physicality", &CovarianceMatrix::physicality);

  m.def("symmetric_state", &symmetric_state, py::arg("variances"));
  m.def(
      "symmetric_state_db",
      [](double xm_db, double xp_db, double ym_db, double yp_db) {
        return symmetric_state({from_db(xm_db), from_db(xp_db), from_db(ym_db), from_db(yp_db)});
      },
      py::arg("x_minus_db"), py::arg("x_plus_db"), py::arg("y_minus_db"), py::arg("y_plus_db"));
  m.def("combination_variances", &combination_variances, py::arg("cm"));
  m.def("purity", &purity, py::arg("cm"));
  m.def(
      "conditional_variance",
      [](const CovarianceMatrix& cm, Quad o1, Quad o2) {
        const auto cv = conditional_variance(cm, o1, o2);
        return py::make_tuple(cv.variance, cv.gain);
      },
      py::arg("cm"), py::arg("o1"), py::arg("o2"));

  py::class_<ReidProduct>(m, "ReidProduct")
      .def_readonly("e", &ReidProduct::e)
      .def_readonly("e_squared", &ReidProduct::e_squared)
      .def_readonly("gain_x", &ReidProduct::gain_x)
      .def_readonly("gain_y", &ReidProduct::gain_y)
      .def("entangled", &ReidProduct::entangled);
  m.def("reid_product", &reid_product, py::arg("cm"));
  m.def("duan_sum", &duan_sum, py::arg("cm"));
  m.def("rotate_quadratures", &rotate_quadratures, py::arg("cm"), py::arg("angles"));
  m.def("apply_uniform_efficiency", &apply_uniform_efficiency, py::arg("cm"), py::arg("eta"));
  m.def("apply_per_mode_efficiency", &apply_per_mode_efficiency, py::arg("cm"), py::arg("eta1"),
        py::arg("eta2"));
  m.def("invert_efficiency", &invert_efficiency, py::arg("v_measured"), py::arg("eta"));

  // NOPO model
  py::class_<ChannelEfficiency>(m, "ChannelEfficiency")
      .def(py::init([](double lambda_nm, double esc, double pro, double mm, double det) {
             return ChannelEfficiency{lambda_nm, esc, pro, mm, det};
           }),
           py::arg("lambda_nm"), py::arg("esc"), py::arg("pro"), py::arg("mm"), py::arg("det"))
      .def_readwrite("lambda_nm", &ChannelEfficiency::lambda_nm)
      .def_readwrite("esc", &ChannelEfficiency::esc)
      .def_readwrite("pro", &ChannelEfficiency::pro)
      .def_readwrite("mm", &ChannelEfficiency::mm)
      .def_readwrite("det", &ChannelEfficiency::det)
      .def("optical", &ChannelEfficiency::optical)
      .def("total", &ChannelEfficiency::total);

  py::class_<EfficiencyChain>(m, "EfficiencyChain")
      .def(py::init<>())
      .def_readwrite("ch1", &EfficiencyChain::ch1)
      .def_readwrite("ch2", &EfficiencyChain::ch2)
      .def("esc_mean", &EfficiencyChain::esc_mean)
      .def("det_mean", &EfficiencyChain::det_mean)
      .def("optical_mean", &EfficiencyChain::optical_mean)
      .def("total_mean", &EfficiencyChain::total_mean);

  m.def("spectrum_pm", &spectrum_pm, py::arg("sigma"), py::arg("omega_tilde"), py::arg("eta_tot"));
  m.def("spectrum_at_frequency", &spectrum_at_frequency, py::arg("sigma"), py::arg("f_hz"),
        py::arg("bandwidth_hz"), py::arg("eta_tot"));
  m.def("apply_phase_noise", &apply_phase_noise, py::arg("v_q"), py::arg("v_orthogonal"),
        py::arg("delta_theta"));
  m.def("infer_phase_noise", &infer_phase_noise, py::arg("v_measured"), py::arg("v_sq_model"),
        py::arg("v_asq_model"));
  m.def(
      "optimal_sigma",
      [](double eta_tot, double omega_tilde, double delta_theta) {
        const auto opt = optimal_sigma(eta_tot, omega_tilde, delta_theta);
        return py::make_tuple(opt.sigma, opt.v_min);
      },
      py::arg("eta_tot"), py::arg("omega_tilde"), py::arg("delta_theta"));
  m.def("escape_efficiency", &escape_efficiency, py::arg("T"), py::arg("loss"));
  m.def("sfg_pump_power", &sfg_pump_power, py::arg("p1_w"), py::arg("p2_w"),
        py::arg("gamma_per_w"));

  // synthesis and traces
  py::class_<QuadratureTraceSet>(m, "QuadratureTraceSet")
      .def_property_readonly("ch1",
                             [](const QuadratureTraceSet& t) { return vector_to_array(t.ch1); })
      .def_property_readonly("ch2",
                             [](const QuadratureTraceSet& t) { return vector_to_array(t.ch2); })
      .def_readonly("sample_rate_hz", &QuadratureTraceSet::sample_rate_hz)
      .def_readonly("metadata", &QuadratureTraceSet::metadata)
      .def_property_readonly("lo_angles",
                             [](const QuadratureTraceSet& t) { return t.lo_angles; })
      .def("sample_count", &QuadratureTraceSet::sample_count)
      .def("duration_s", &QuadratureTraceSet::duration_s);

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("model", &SynthConfig::model)
      .def_readwrite("sample_rate_hz", &SynthConfig::sample_rate_hz)
      .def_readwrite("duration_s", &SynthConfig::duration_s)
      .def_readwrite("lo_angles", &SynthConfig::lo_angles)
      .def_readwrite("seed", &SynthConfig::seed)
      .def_readwrite("electronic_noise_enabled", &SynthConfig::electronic_noise_enabled)
      .def_readwrite("electronic_noise_db", &SynthConfig::electronic_noise_db)
      .def_readwrite("cmrr_db", &SynthConfig::cmrr_db);

  py::class_<CavityParams>(m, "CavityParams")
      .def(py::init<>())
      .def_readwrite("length_m", &CavityParams::length_m)
      .def_readwrite("output_coupler_T", &CavityParams::output_coupler_T)
      .def_readwrite("loss_ch1", &CavityParams::loss_ch1)
      .def_readwrite("loss_ch2", &CavityParams::loss_ch2)
      .def_readwrite("bandwidth_hz", &CavityParams::bandwidth_hz)
      .def_readwrite("fsr_hz", &CavityParams::fsr_hz)
      .def_readwrite("finesse", &CavityParams::finesse)
      .def_readwrite("threshold_power_w", &CavityParams::threshold_power_w);

  py::class_<PumpSetting>(m, "PumpSetting")
      .def_static("from_sigma", &PumpSetting::from_sigma, py::arg("sigma"))
      .def_static("from_power", &PumpSetting::from_power, py::arg("power_w"),
                  py::arg("threshold_w"))
      .def_readwrite("sigma", &PumpSetting::sigma);

  py::class_<PhaseNoise>(m, "PhaseNoise")
      .def(py::init([](double rms_rad, double corner_hz) {
             return PhaseNoise{rms_rad, corner_hz};
           }),
           py::arg("rms_rad"), py::arg("corner_hz") = 1000.0)
      .def_readwrite("rms_rad", &PhaseNoise::rms_rad)
      .def_readwrite("corner_hz", &PhaseNoise::corner_hz)
      .def("small_angle", &PhaseNoise::small_angle);

  py::class_<NopoModel>(m, "NopoModel")
      .def(py::init<>())
      .def_readwrite("cavity", &NopoModel::cavity)
      .def_readwrite("eff", &NopoModel::eff)
      .def_readwrite("pump", &NopoModel::pump)
      .def_readwrite("phase_noise", &NopoModel::phase_noise);

  m.def("predicted_measured", &predicted_measured, py::arg("model"), py::arg("f_hz"));
  m.def("predicted_optical", &predicted_optical, py::arg("model"), py::arg("f_hz"));
  m.def("synthesize", [](const SynthConfig& cfg) { return synthesize(cfg); }, py::arg("config"));
  m.def("shot_noise_reference", &shot_noise_reference, py::arg("config"));
  m.def("dark_trace", &dark_trace, py::arg("config"));
  m.def("write_trace", &write_trace, py::arg("path"), py::arg("trace"));
  m.def("read_trace", &read_trace, py::arg("path"));

  // analysis chain
  py::enum_<WelchWindow>(m, "WelchWindow")
      .value("rectangular", WelchWindow::rectangular)
      .value("hann", WelchWindow::hann);

  py::class_<DemodResult>(m, "DemodResult")
      .def_readonly("sample_rate_hz", &DemodResult::sample_rate_hz)
      .def_property_readonly("i1", [](const DemodResult& d) { return vector_to_array(d.i1); })
      .def_property_readonly("q1", [](const DemodResult& d) { return vector_to_array(d.q1); })
      .def_property_readonly("i2", [](const DemodResult& d) { return vector_to_array(d.i2); })
      .def_property_readonly("q2", [](const DemodResult& d) { return vector_to_array(d.q2); });
  m.def("demodulate", &demodulate, py::arg("trace"), py::arg("f_demod_hz"),
        py::arg("lpf_cutoff_hz"));

  py::class_<RawSpectrum>(m, "RawSpectrum")
      .def_readonly("sample_rate_hz", &RawSpectrum::sample_rate_hz)
      .def_readonly("fft_length", &RawSpectrum::fft_length)
      .def_readonly("n_averages", &RawSpectrum::n_averages)
      .def("rbw_hz", &RawSpectrum::rbw_hz)
      .def_property_readonly("freq_hz",
                             [](const RawSpectrum& s) { return vector_to_array(s.freq_hz); })
      .def_property_readonly("ch1", [](const RawSpectrum& s) { return vector_to_array(s.ch1); })
      .def_property_readonly("ch2", [](const RawSpectrum& s) { return vector_to_array(s.ch2); })
      .def_property_readonly("sum", [](const RawSpectrum& s) { return vector_to_array(s.sum); })
      .def_property_readonly("diff", [](const RawSpectrum& s) { return vector_to_array(s.diff); });
  m.def("welch_spectra", &welch_spectra, py::arg("trace"), py::arg("fft_length"),
        py::arg("n_averages"), py::arg("window") = WelchWindow::rectangular);
  m.def("combined_variance", &combined_variance, py::arg("trace"), py::arg("w"));
  m.def("spectral_combined_variance", &spectral_combined_variance, py::arg("spectrum"),
        py::arg("w"), py::arg("f_lo"), py::arg("f_hi"));

  py::enum_<Combo>(m, "Combo")
      .value("x_minus", Combo::x_minus)
      .value("x_plus", Combo::x_plus)
      .value("y_minus", Combo::y_minus)
      .value("y_plus", Combo::y_plus);

  py::class_<SpectrumSet>(m, "SpectrumSet")
      .def_readonly("rbw_hz", &SpectrumSet::rbw_hz)
      .def_readonly("n_averages", &SpectrumSet::n_averages)
      .def_readonly("electronic_corrected", &SpectrumSet::electronic_corrected)
      .def_property_readonly("freq_hz",
                             [](const SpectrumSet& s) { return vector_to_array(s.freq_hz); })
      .def("combo_linear", [](const SpectrumSet& s, Combo c) {
        return vector_to_array(s.combo(c).linear);
      });
  m.def(
      "normalized_spectra",
      [](const RawSpectrum& x_run, const RawSpectrum& y_run, const RawSpectrum& shot_ref,
         const RawSpectrum* dark, bool electronic_correction) {
        return normalized_spectra(x_run, y_run, shot_ref, dark, electronic_correction);
      },
      py::arg("x_run"), py::arg("y_run"), py::arg("shot_ref"), py::arg("dark") = nullptr,
      py::arg("electronic_correction") = false);

  py::class_<VarianceEstimate>(m, "VarianceEstimate")
      .def_readonly("linear", &VarianceEstimate::linear)
      .def_readonly("sem", &VarianceEstimate::sem)
      .def("db", &VarianceEstimate::db)
      .def("sem_db", &VarianceEstimate::sem_db);

  py::class_<EntanglementReport>(m, "EntanglementReport")
      .def_readonly("band_lo_hz", &EntanglementReport::band_lo_hz)
      .def_readonly("band_hi_hz", &EntanglementReport::band_hi_hz)
      .def_readonly("corrected_valid", &EntanglementReport::corrected_valid)
      .def_readonly("eta_det", &EntanglementReport::eta_det)
      .def_readonly("reid_e", &EntanglementReport::reid_e)
      .def_readonly("reid_e_sem", &EntanglementReport::reid_e_sem)
      .def_readonly("reid_e2", &EntanglementReport::reid_e2)
      .def_readonly("gain_x", &EntanglementReport::gain_x)
      .def_readonly("gain_y", &EntanglementReport::gain_y)
      .def_readonly("duan", &EntanglementReport::duan)
      .def_readonly("duan_sem", &EntanglementReport::duan_sem)
      .def_readonly("purity", &EntanglementReport::purity_value)
      .def_readonly("purity_sem", &EntanglementReport::purity_sem)
      .def_readonly("reid_entangled", &EntanglementReport::reid_entangled)
      .def_readonly("duan_entangled", &EntanglementReport::duan_entangled)
      .def("measured", [](const EntanglementReport& r, Combo c) {
        return r.measured[static_cast<int>(c)];
      })
      .def("corrected", [](const EntanglementReport& r, Combo c) {
        return r.corrected[static_cast<int>(c)];
      });
  py::class_<BandReportOptions>(m, "BandReportOptions")
      .def(py::init<>())
      .def_readwrite("mad_threshold", &BandReportOptions::mad_threshold)
      .def_readwrite("per_bin_gain", &BandReportOptions::per_bin_gain);
  m.def("band_report", &band_report, py::arg("spectra"), py::arg("f_lo"), py::arg("f_hi"),
        py::arg("eff"), py::arg("options") = BandReportOptions{});

  // configuration
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("model", &ExperimentConfig::model)
      .def_readwrite("synth", &ExperimentConfig::synth);
  m.def("default_config", &default_config);
  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("serialize_config", &serialize_config, py::arg("config"));
}
