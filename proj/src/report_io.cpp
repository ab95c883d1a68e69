#include "epr/report_io.hpp"

#include <cstdio>
#include <ostream>

#include "epr/units.hpp"

namespace epr {

namespace {

const char* physicality_name(Physicality p) {
  switch (p) {
    case Physicality::physical: return "physical";
    case Physicality::marginal: return "marginal (slightly unphysical, finite statistics)";
    default: return "unphysical";
  }
}

void csv_combo_columns(std::ostream& os, const CombinationSpectrum& c, std::size_t k) {
  if (c.empty()) {
    os << ",,";
    return;
  }
  os << "," << format_number(c.linear[k]) << "," << format_number(to_db(c.linear[k]));
}

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.8e", v);
  return buf;
}

void write_spectra_csv(std::ostream& os, const SpectrumSet& spectra) {
  os << "freq_hz";
  for (const char* name : kComboNames) {
    std::string tag(name);
    os << "," << tag << "_linear," << tag << "_db";
  }
  os << ",ch1_x_linear,ch1_x_db,ch2_x_linear,ch2_x_db"
     << ",ch1_y_linear,ch1_y_db,ch2_y_linear,ch2_y_db\n";
  for (std::size_t k = 0; k < spectra.freq_hz.size(); ++k) {
    os << format_number(spectra.freq_hz[k]);
    for (const auto& combo : spectra.combos) csv_combo_columns(os, combo, k);
    csv_combo_columns(os, spectra.ch1_x, k);
    csv_combo_columns(os, spectra.ch2_x, k);
    csv_combo_columns(os, spectra.ch1_y, k);
    csv_combo_columns(os, spectra.ch2_y, k);
    os << "\n";
  }
}

void write_report_text(std::ostream& os, const EntanglementReport& rep,
                       const std::string& label_ch1, const std::string& label_ch2) {
  os << "band: " << format_number(rep.band_lo_hz) << " Hz .. " << format_number(rep.band_hi_hz)
     << " Hz\n";
  os << "channels: ch1 = " << label_ch1 << ", ch2 = " << label_ch2 << "\n";
  os << "averages: " << rep.n_averages
     << ", electronic noise correction: " << (rep.electronic_corrected ? "per-bin" : "off")
     << "\n\n";

  os << "measured variances (shot-noise units):\n";
  for (int c = 0; c < 4; ++c) {
    os << "  V[" << kComboNames[c] << "] = " << format_number(rep.measured[c].linear) << " +- "
       << format_number(rep.measured[c].sem) << "  (" << format_number(rep.measured[c].db())
       << " dB +- " << format_number(rep.measured[c].sem_db()) << " dB)"
       << "  [bins " << rep.bins_used[c] << ", masked " << rep.bins_masked[c] << "]\n";
  }

  os << "\ndetector-corrected variances (eta_det = " << format_number(rep.eta_det) << "):\n";
  if (!rep.corrected_valid) {
    os << "  correction is unphysical for at least one combination; criteria skipped\n";
    return;
  }
  for (int c = 0; c < 4; ++c) {
    os << "  Vo[" << kComboNames[c] << "] = " << format_number(rep.corrected[c].linear) << " +- "
       << format_number(rep.corrected[c].sem) << "  (" << format_number(rep.corrected[c].db())
       << " dB +- " << format_number(rep.corrected[c].sem_db()) << " dB)\n";
  }

  os << "\ncriteria (corrected state):\n";
  os << "  reid E   = " << format_number(rep.reid_e) << " +- " << format_number(rep.reid_e_sem)
     << "  [entangled iff < 1: " << (rep.reid_entangled ? "yes" : "no") << "]\n";
  os << "  reid E^2 = " << format_number(rep.reid_e2) << " +- " << format_number(rep.reid_e2_sem)
     << "\n";
  os << "  gains    w_x = " << format_number(rep.gain_x) << ", w_y = " << format_number(rep.gain_y)
     << "\n";
  if (rep.reid_e_per_bin) {
    os << "  reid E (per-bin gains) = " << format_number(*rep.reid_e_per_bin) << "\n";
  }
  os << "  duan V_EPR = " << format_number(rep.duan) << " +- " << format_number(rep.duan_sem)
     << "  [entangled iff < 2: " << (rep.duan_entangled ? "yes" : "no") << "]\n";
  os << "  duan V_EPR (measured, uncorrected) = " << format_number(rep.duan_measured) << "\n";
  os << "  purity  = " << format_number(rep.purity_value) << " +- "
     << format_number(rep.purity_sem) << "\n";
  os << "  reconstructed state: " << physicality_name(rep.state_physicality) << "\n";
}

void write_report_csv(std::ostream& os, const std::vector<EntanglementReport>& reports) {
  os << "band_lo_hz,band_hi_hz";
  for (const char* name : kComboNames) {
    std::string tag(name);
    os << ",V_" << tag << "_linear,V_" << tag << "_sem,V_" << tag << "_db";
  }
  for (const char* name : kComboNames) {
    std::string tag(name);
    os << ",Vo_" << tag << "_linear,Vo_" << tag << "_sem,Vo_" << tag << "_db";
  }
  os << ",reid_e,reid_e_sem,reid_e2,reid_e2_sem,gain_x,gain_y,duan,duan_sem,purity,purity_sem"
     << ",reid_entangled,duan_entangled,corrected_valid\n";
  for (const auto& rep : reports) {
    os << format_number(rep.band_lo_hz) << "," << format_number(rep.band_hi_hz);
    for (int c = 0; c < 4; ++c) {
      os << "," << format_number(rep.measured[c].linear) << ","
         << format_number(rep.measured[c].sem) << "," << format_number(rep.measured[c].db());
    }
    for (int c = 0; c < 4; ++c) {
      if (rep.corrected_valid) {
        os << "," << format_number(rep.corrected[c].linear) << ","
           << format_number(rep.corrected[c].sem) << "," << format_number(rep.corrected[c].db());
      } else {
        os << ",,,";
      }
    }
    os << "," << format_number(rep.reid_e) << "," << format_number(rep.reid_e_sem) << ","
       << format_number(rep.reid_e2) << "," << format_number(rep.reid_e2_sem) << ","
       << format_number(rep.gain_x) << "," << format_number(rep.gain_y) << ","
       << format_number(rep.duan) << "," << format_number(rep.duan_sem) << ","
       << format_number(rep.purity_value) << "," << format_number(rep.purity_sem) << ","
       << (rep.reid_entangled ? 1 : 0) << "," << (rep.duan_entangled ? 1 : 0) << ","
       << (rep.corrected_valid ? 1 : 0) << "\n";
  }
}

void write_consistency_text(std::ostream& os, const ConsistencyReport& rep) {
  for (const auto& c : rep.checks) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name << ": expected " << format_number(c.expected)
       << ", actual " << format_number(c.actual) << ", residual "
       << format_number(c.rel_residual) << " (tolerance " << format_number(c.tolerance) << ")\n";
  }
  for (const auto& d : rep.derived) {
    os << "     " << d.name << " = " << format_number(d.value) << "\n";
  }
}

}  // namespace epr
