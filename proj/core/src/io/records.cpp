#include "pinlab/io/records.hpp"

#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "pinlab/error.hpp"

namespace pinlab::io {

std::string csv_number(double value) {
  if (std::isnan(value)) return {};
  return fmt::format("{:.17g}", value);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  require(cells.size() == header_.size(), "CSV row width does not match the header");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out;
  const auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

CsvTable partition_table() {
  return CsvTable({"run_id", "seed", "d", "rho", "beta", "t", "R", "logZ", "cert", "pinned", "sample", "status"});
}

std::string status_word(const CellStatus& status) {
  if (status.ok) return "ok";
  const auto colon = status.error.find(':');
  return colon == std::string::npos ? status.error : status.error.substr(0, colon);
}

void add_partition_row(CsvTable& table, const std::string& run_id, const SolveRecord& r) {
  const bool ok = r.status.ok;
  table.add_row({run_id, std::to_string(r.seed), std::to_string(r.dimension), csv_number(r.rho),
                 csv_number(r.result.beta), csv_number(r.result.t2 - r.result.t1),
                 ok ? std::to_string(r.result.radius) : "", ok ? csv_number(r.result.log_z) : "",
                 ok ? csv_number(r.result.certificate) : "", r.result.pinned ? "1" : "0", std::to_string(r.sample),
                 status_word(r.status)});
}

CsvTable annealed_table() {
  return CsvTable({"run_id", "seed", "d", "rho", "beta", "t", "R", "logZ", "cert", "pinned", "sample", "status", "b",
                   "lambda", "contact_fraction", "defect_mass", "residual", "free_energy"});
}

std::string renewal_summary_json(const RenewalEstimate& e) {
  // Infinite bounds (no hits) are written as null.
  const auto num = [](double v) -> nlohmann::json {
    if (!std::isfinite(v)) return nullptr;
    return v;
  };
  nlohmann::ordered_json doc;
  doc["beta"] = e.beta;
  doc["t"] = e.t;
  doc["n"] = e.n;
  doc["hits"] = e.hits;
  doc["logZ_est"] = num(e.log_z);
  doc["ci_lo"] = num(e.ci_lo);
  doc["ci_hi"] = num(e.ci_hi);
  doc["acc_rate"] = e.acceptance_rate;
  doc["truncated_bias_bound"] = e.truncated_bias_bound;
  return doc.dump();
}

}  // namespace pinlab::io
