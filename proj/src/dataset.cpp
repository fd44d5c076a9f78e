#include "wheelflat/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "wheelflat/csv.hpp"
#include "wheelflat/errors.hpp"

namespace wheelflat {

LabelVector Dataset::label(std::size_t column) const {
  LabelVector out{};
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    out[c] = labels(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(column));
  }
  return out;
}

void Dataset::validate() const {
  if (level < 0 || static_cast<std::size_t>(features.rows()) != feature_width(level)) {
    throw std::invalid_argument("feature rows do not match level " +
                                std::to_string(level));
  }
  if (labels.rows() != static_cast<Eigen::Index>(kChannelCount)) {
    throw std::invalid_argument("labels must have 4 rows");
  }
  if (labels.cols() != features.cols() ||
      provenance.size() != static_cast<std::size_t>(features.cols())) {
    throw std::invalid_argument("feature, label and provenance counts differ");
  }
}

std::size_t feature_width(int level) {
  return kChannelCount << level;
}

int level_for_width(std::size_t width) {
  for (int j = 0; j <= 16; ++j) {
    if (feature_width(j) == width) return j;
  }
  throw std::invalid_argument("feature width " + std::to_string(width) +
                              " is not 4 * 2^j");
}

std::optional<std::size_t> defect_channel(const LabelVector& label) {
  const auto it = std::max_element(label.begin(), label.end());
  if (*it <= 0.0) return std::nullopt;
  return static_cast<std::size_t>(it - label.begin());
}

std::optional<std::size_t> height_bin(const LabelVector& label) {
  const auto channel = defect_channel(label);
  if (!channel) return std::nullopt;
  const double y = label[*channel];
  const double bin = std::round((y - 0.2) / 0.2);
  return static_cast<std::size_t>(std::clamp(bin, 0.0, double(kHeightBins - 1)));
}

void write_dataset_csv(const Dataset& dataset, std::ostream& out,
                       bool with_provenance) {
  dataset.validate();
  const std::size_t dim = dataset.feature_dim();
  for (std::size_t i = 0; i < dim; ++i) out << (i ? "," : "") << 's' << i;
  for (auto name : kChannelNames) out << ',' << name;
  if (with_provenance) out << ",provenance";
  out << '\n';

  std::vector<double> row(dim + kChannelCount);
  for (std::size_t col = 0; col < dataset.size(); ++col) {
    const auto c = static_cast<Eigen::Index>(col);
    for (std::size_t i = 0; i < dim; ++i) row[i] = dataset.features(static_cast<Eigen::Index>(i), c);
    for (std::size_t k = 0; k < kChannelCount; ++k) {
      row[dim + k] = dataset.labels(static_cast<Eigen::Index>(k), c);
    }
    if (!with_provenance) {
      csv::write_row(out, row);
      continue;
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << csv::format_double(row[i]) << ',';
    }
    out << (dataset.provenance[col] == Provenance::Original ? "original" : "augmented")
        << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in, const std::string& source_name) {
  csv::Reader reader(in, source_name);
  const auto header = reader.header();
  const bool has_provenance = !header.empty() && header.back() == "provenance";
  const std::size_t trailing = kChannelCount + (has_provenance ? 1 : 0);
  if (header.size() < trailing + 1) reader.fail("header has too few columns");
  const std::size_t label_start = header.size() - trailing;
  for (std::size_t i = 0; i < label_start; ++i) {
    if (header[i] != "s" + std::to_string(i)) {
      reader.fail("expected feature column 's" + std::to_string(i) + "', found '" +
                  header[i] + "'");
    }
  }
  for (std::size_t k = 0; k < kChannelCount; ++k) {
    if (header[label_start + k] != kChannelNames[k]) {
      reader.fail("expected label column '" + std::string(kChannelNames[k]) + "'");
    }
  }
  const std::size_t dim = label_start;
  int level = 0;
  try {
    level = level_for_width(dim);
  } catch (const std::invalid_argument& e) {
    reader.fail(e.what());
  }

  std::vector<double> values;
  std::vector<Provenance> provenance;
  std::vector<std::string_view> cells;
  while (reader.next(cells)) {
    if (cells.size() != header.size()) {
      reader.fail("expected " + std::to_string(header.size()) + " columns, found " +
                  std::to_string(cells.size()));
    }
    for (std::size_t i = 0; i < dim + kChannelCount; ++i) {
      values.push_back(reader.parse_double(cells[i]));
    }
    if (has_provenance) {
      const auto tag = cells.back();
      if (tag == "original") {
        provenance.push_back(Provenance::Original);
      } else if (tag == "augmented") {
        provenance.push_back(Provenance::Augmented);
      } else {
        reader.fail("unknown provenance '" + std::string(tag) + "'");
      }
    } else {
      provenance.push_back(Provenance::Original);
    }
  }

  const auto n = static_cast<Eigen::Index>(provenance.size());
  const auto stride = static_cast<Eigen::Index>(dim + kChannelCount);
  Eigen::Map<const Eigen::MatrixXd> all(values.data(), stride, n);
  Dataset ds;
  ds.level = level;
  ds.features = all.topRows(static_cast<Eigen::Index>(dim));
  ds.labels = all.bottomRows(static_cast<Eigen::Index>(kChannelCount));
  ds.provenance = std::move(provenance);
  return ds;
}

}  // namespace wheelflat
