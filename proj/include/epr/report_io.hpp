#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "epr/analysis.hpp"

namespace epr {

// All numeric output uses fixed scientific notation with 9 significant digits.
std::string format_number(double v);

void write_spectra_csv(std::ostream& os, const SpectrumSet& spectra);
void write_report_text(std::ostream& os, const EntanglementReport& rep,
                       const std::string& label_ch1, const std::string& label_ch2);
void write_report_csv(std::ostream& os, const std::vector<EntanglementReport>& reports);
void write_consistency_text(std::ostream& os, const ConsistencyReport& rep);

}  // namespace epr
