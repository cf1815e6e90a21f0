#pragma once

// Covariate tables (per-frame amplitude and pitch) and dataset-level
// regress-out built on CovariateProjector.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dataset.hpp"
#include "error.hpp"
#include "projector.hpp"
#include "text.hpp"

namespace phonedyn {

struct CovariateColumns {
  std::vector<double> amplitude;
  std::vector<double> pitch_hz;

  std::size_t frames() const noexcept { return amplitude.size(); }
};

using CovariateTable = std::map<std::string, CovariateColumns>;

inline void write_covariates(std::ostream& out, const CovariateTable& table) {
  out << "utterance_id\tframe\tamplitude\tpitch_hz\n";
  for (const auto& [utt, cols] : table)
    for (std::size_t f = 0; f < cols.frames(); ++f)
      out << utt << '\t' << f << '\t' << text::format_double(cols.amplitude[f]) << '\t'
          << text::format_double(cols.pitch_hz[f]) << '\n';
}

inline void write_covariates(const fs::path& path, const CovariateTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write covariate file: " + path.string());
  write_covariates(out, table);
}

/// Reads the covariate TSV. Rows of one utterance must list frames 0..n-1
/// in order; an optional header line is skipped.
inline CovariateTable read_covariates(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open covariate file: " + path.string());
  CovariateTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cols = text::split(t, '\t');
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (cols.size() != 4) throw FormatError(where + ": expected 4 tab-separated columns");
    if (text::trim(cols[0]) == "utterance_id") continue;
    const auto frame = text::to_int(cols[1]);
    const auto amp = text::to_double(cols[2]);
    const auto pitch = text::to_double(cols[3]);
    if (!frame || !amp || !pitch) throw FormatError(where + ": malformed numeric field");
    if (!std::isfinite(*amp) || !std::isfinite(*pitch) || *amp < 0.0 || *pitch < 0.0)
      throw DataError(where + ": covariates must be finite and non-negative");
    auto& c = table[std::string(text::trim(cols[0]))];
    if (*frame != static_cast<long long>(c.frames())) throw FormatError(where + ": frames must be listed in order from 0");
    c.amplitude.push_back(*amp);
    c.pitch_hz.push_back(*pitch);
  }
  return table;
}

/// Fits the projector on every frame that has both features and covariates
/// (each utterance truncated to the shorter of the two).
inline CovariateProjector fit_dataset_projector(const Dataset& ds, const CovariateTable& table, double alpha = 1.0) {
  Eigen::Index rows = 0;
  for (const auto& u : ds.utterances) {
    const auto it = table.find(u.id);
    if (it == table.end()) throw DataError("covariates: no rows for utterance \"" + u.id + "\"");
    rows += std::min<Eigen::Index>(u.features.frames(), static_cast<Eigen::Index>(it->second.frames()));
  }
  Eigen::MatrixXd X(rows, ds.dims), C(rows, 2);
  Eigen::Index r = 0;
  for (const auto& u : ds.utterances) {
    const auto& cov = table.at(u.id);
    const auto n = std::min<Eigen::Index>(u.features.frames(), static_cast<Eigen::Index>(cov.frames()));
    for (Eigen::Index f = 0; f < n; ++f, ++r) {
      X.row(r) = u.features.data.row(f);
      C(r, 0) = cov.amplitude[static_cast<std::size_t>(f)];
      C(r, 1) = cov.pitch_hz[static_cast<std::size_t>(f)];
    }
  }
  return fit_projector(X, C, alpha);
}

/// Removes the covariate directions from every frame of every utterance.
inline void regress_out(Dataset& ds, const CovariateProjector& p) {
  for (auto& u : ds.utterances) project_out_inplace(p, u.features.data);
}

}  // namespace phonedyn
