//
// Copyright 2026 The DropEscape Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dropescape/data_io.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "absl/strings/ascii.h"
#include "dropescape/rng.h"

namespace dropescape {
namespace {

absl::Status ParseError(size_t line, std::string_view what) {
  return absl::InvalidArgumentError(
      absl::StrCat("Parse error at line ", line, ": ", std::string(what)));
}

absl::Status ValidateRho(double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Parameter error: rho must lie in [0, 1), got ", rho));
  }
  return absl::OkStatus();
}

std::vector<std::string> SplitLines(std::string_view text) {
  std::vector<std::string> lines = absl::StrSplit(
      absl::string_view(text.data(), text.size()), '\n');
  for (std::string& line : lines) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
  }
  return lines;
}

bool IsBlank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

// Standard normal rows scaled by 1/sqrt(p).
RealVector GaussianRow(size_t p, SeededRng& rng) {
  RealVector x(p);
  const double scale = 1.0 / std::sqrt(static_cast<double>(p));
  for (double& v : x) v = scale * rng.StandardNormal();
  return x;
}

absl::Status ValidateShape(size_t n, size_t p) {
  if (n == 0 || p == 0) {
    return absl::InvalidArgumentError("Parameter error: n and p must be >= 1");
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<DataFormat> ParseDataFormat(std::string_view name) {
  if (name == "csv") return DataFormat::kCsv;
  if (name == "svmlight" || name == "libsvm") return DataFormat::kSvmlight;
  return absl::InvalidArgumentError(absl::StrCat(
      "Unknown data format '", std::string(name), "'; expected csv or svmlight"));
}

absl::StatusOr<Dataset> ParseCsv(std::string_view text) {
  const std::vector<std::string> lines = SplitLines(text);
  size_t header_line = 0;
  while (header_line < lines.size() && IsBlank(lines[header_line])) {
    ++header_line;
  }
  if (header_line == lines.size()) {
    return absl::FailedPreconditionError("Data error: empty CSV file");
  }
  const size_t columns =
      std::vector<std::string>(absl::StrSplit(lines[header_line], ',')).size();
  if (columns < 2) {
    return ParseError(header_line + 1,
                      "need at least one feature column and a label column");
  }
  std::vector<RealVector> rows;
  RealVector labels;
  for (size_t l = header_line + 1; l < lines.size(); ++l) {
    if (IsBlank(lines[l])) continue;
    const std::vector<std::string> fields = absl::StrSplit(lines[l], ',');
    if (fields.size() != columns) {
      return ParseError(l + 1, absl::StrCat("expected ", columns,
                                            " fields, found ", fields.size()));
    }
    RealVector values(columns);
    for (size_t c = 0; c < columns; ++c) {
      const std::string field(absl::StripAsciiWhitespace(fields[c]));
      if (!absl::SimpleAtod(field, &values[c]) || !std::isfinite(values[c])) {
        return ParseError(l + 1, absl::StrCat("not a number: '", field, "'"));
      }
    }
    labels.push_back(values.back());
    values.pop_back();
    rows.push_back(std::move(values));
  }
  if (rows.empty()) {
    return absl::FailedPreconditionError("Data error: CSV file has no rows");
  }
  return Dataset::Create(rows, std::move(labels));
}

absl::StatusOr<Dataset> ParseSvmlight(std::string_view text) {
  const std::vector<std::string> lines = SplitLines(text);
  std::vector<std::vector<std::pair<size_t, double>>> entries;
  RealVector labels;
  size_t dim = 0;
  for (size_t l = 0; l < lines.size(); ++l) {
    std::string_view line = lines[l];
    if (const size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    if (IsBlank(line)) continue;
    const std::vector<std::string> tokens = absl::StrSplit(
        absl::string_view(line.data(), line.size()), ' ', absl::SkipEmpty());
    double label = 0.0;
    if (!absl::SimpleAtod(tokens[0], &label) || !std::isfinite(label)) {
      return ParseError(l + 1, absl::StrCat("bad label '", tokens[0], "'"));
    }
    std::vector<std::pair<size_t, double>> row;
    for (size_t t = 1; t < tokens.size(); ++t) {
      const std::string& token = tokens[t];
      const size_t colon = token.find(':');
      size_t index = 0;
      double value = 0.0;
      if (colon == std::string::npos ||
          !absl::SimpleAtoi(token.substr(0, colon), &index) ||
          !absl::SimpleAtod(token.substr(colon + 1), &value) ||
          !std::isfinite(value)) {
        return ParseError(l + 1, absl::StrCat("bad entry '", token, "'"));
      }
      if (index == 0) return ParseError(l + 1, "indices are 1-based");
      dim = std::max(dim, index);
      row.emplace_back(index - 1, value);
    }
    entries.push_back(std::move(row));
    labels.push_back(label);
  }
  if (entries.empty()) {
    return absl::FailedPreconditionError("Data error: empty svmlight file");
  }
  if (dim == 0) {
    return absl::FailedPreconditionError("Data error: no feature entries");
  }
  std::vector<RealVector> rows(entries.size(), RealVector(dim, 0.0));
  for (size_t i = 0; i < entries.size(); ++i) {
    for (const auto& [j, v] : entries[i]) rows[i][j] = v;
  }
  return Dataset::Create(rows, std::move(labels));
}

absl::StatusOr<Dataset> LoadDataset(const std::string& path,
                                    DataFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("Data error: cannot read ", path));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  return format == DataFormat::kCsv ? ParseCsv(text) : ParseSvmlight(text);
}

absl::StatusOr<Dataset> SyntheticSeparableLogistic(size_t n, size_t p,
                                                   uint64_t seed,
                                                   double margin) {
  if (absl::Status s = ValidateShape(n, p); !s.ok()) return s;
  if (!(margin >= 0.0) || margin >= 0.5) {
    return absl::InvalidArgumentError("Parameter error: margin in [0, 0.5)");
  }
  SeededRng rng(seed);
  RealVector w(p);
  for (double& v : w) v = rng.StandardNormal();
  const double norm = Norm(w);
  for (double& v : w) v /= norm;
  std::vector<RealVector> rows;
  RealVector labels;
  while (rows.size() < n) {
    RealVector x = GaussianRow(p, rng);
    const double score = Dot(w, x);
    if (std::abs(score) < margin || score == 0.0) continue;
    labels.push_back(score > 0.0 ? 1.0 : -1.0);
    rows.push_back(std::move(x));
  }
  return Dataset::Create(rows, std::move(labels));
}

absl::StatusOr<Dataset> SyntheticLinearRegression(size_t n, size_t p,
                                                  double noise,
                                                  uint64_t seed) {
  if (absl::Status s = ValidateShape(n, p); !s.ok()) return s;
  if (!(noise >= 0.0)) {
    return absl::InvalidArgumentError("Parameter error: noise must be >= 0");
  }
  SeededRng rng(seed);
  RealVector w(p);
  for (double& v : w) v = rng.StandardNormal();
  std::vector<RealVector> rows;
  RealVector labels;
  for (size_t i = 0; i < n; ++i) {
    RealVector x = GaussianRow(p, rng);
    labels.push_back(Dot(w, x) + noise * rng.StandardNormal());
    rows.push_back(std::move(x));
  }
  return Dataset::Create(rows, std::move(labels));
}

absl::StatusOr<Dataset> RandomRemoval(const Dataset& d, double rho,
                                      uint64_t seed) {
  if (absl::Status s = ValidateRho(rho); !s.ok()) return s;
  const size_t n = d.size();
  const size_t keep = static_cast<size_t>(
      std::ceil((1.0 - rho) * static_cast<double>(n) - 1e-9));
  if (keep == 0) {
    return absl::FailedPreconditionError("Data error: removal leaves no rows");
  }
  // Partial Fisher-Yates: the first `keep` slots form the sample.
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  SeededRng rng(seed);
  for (size_t i = 0; i < keep; ++i) {
    const size_t j = i + rng.UniformIndex(n - i);
    std::swap(order[i], order[j]);
  }
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return d.Subset(order);
}

absl::StatusOr<Dataset> AdversarialRemoval(const Dataset& d, double rho,
                                           std::span<const double> theta_full) {
  if (absl::Status s = ValidateRho(rho); !s.ok()) return s;
  if (theta_full.size() != d.dim()) {
    return absl::InvalidArgumentError("Dimension mismatch: theta_full");
  }
  const size_t n = d.size();
  const size_t remove =
      static_cast<size_t>(std::floor(static_cast<double>(n) * rho + 1e-9));
  if (remove >= n) {
    return absl::FailedPreconditionError("Data error: removal leaves no rows");
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> margin(n);
  for (size_t i = 0; i < n; ++i) margin[i] = std::abs(Dot(d.row(i), theta_full));
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return margin[a] < margin[b];
  });
  std::vector<size_t> kept(order.begin() + remove, order.end());
  std::sort(kept.begin(), kept.end());
  return d.Subset(kept);
}

absl::StatusOr<Dataset> LoadDataSource(const DataSource& source,
                                       bool logistic_labels) {
  absl::StatusOr<Dataset> d;
  if (!source.path.empty()) {
    d = LoadDataset(source.path, source.format);
  } else if (source.synthetic == "separable_logistic") {
    d = SyntheticSeparableLogistic(source.n, source.p,
                                   source.seed);
  } else if (source.synthetic == "linear_regression") {
    d = SyntheticLinearRegression(source.n, source.p,
                                  source.noise, source.seed);
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("Parameter error: unknown synthetic data '", source.synthetic,
                     "'"));
  }
  if (!d.ok() || !logistic_labels) return d;
  // Logistic labels may arrive as {0, 1}; map 0 to -1.
  RealVector labels(d->labels().begin(), d->labels().end());
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0.0) labels[i] = -1.0;
    if (labels[i] != 1.0 && labels[i] != -1.0) {
      return absl::FailedPreconditionError(absl::StrCat(
          "Data error: logistic labels must be in {-1, 1} or {0, 1}; row ", i,
          " has ", d->label(i)));
    }
  }
  return Dataset::FromFlat(d->dim(),
                           RealVector(d->features().begin(),
                                      d->features().end()),
                           std::move(labels), d->norm_bound());
}

}  // namespace dropescape
