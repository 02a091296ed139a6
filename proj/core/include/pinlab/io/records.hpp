#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pinlab/experiments.hpp"
#include "pinlab/fk_engine.hpp"
#include "pinlab/renewal.hpp"

namespace pinlab::io {

/// 17 significant digits; empty for NaN so missing values stay blank.
std::string csv_number(double value);

/// Comma-separated table with a fixed header. Cells must not contain commas.
class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;

private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// run_id, seed, d, rho, beta, t, R, logZ, cert, pinned, sample, status
CsvTable partition_table();
void add_partition_row(CsvTable& table, const std::string& run_id, const SolveRecord& record);

/// The partition columns (seed, t, R, logZ, cert, pinned, sample, status
/// blank) followed by b, lambda, contact_fraction, defect_mass, residual,
/// free_energy.
CsvTable annealed_table();

/// First word of a library error message ("ToleranceNotMet", ...), or "ok".
std::string status_word(const CellStatus& status);

/// {beta, t, n, hits, logZ_est, ci_lo, ci_hi, acc_rate, truncated_bias_bound}
std::string renewal_summary_json(const RenewalEstimate& estimate);

}  // namespace pinlab::io
