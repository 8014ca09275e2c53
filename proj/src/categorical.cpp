#include "soilph/categorical.hpp"

#include <algorithm>

#include "soilph/error.hpp"

namespace soilph {

std::string_view to_string(Encoding e) { return e == Encoding::one_hot ? "one-hot" : "ordinal"; }

Encoding encoding_from_string(std::string_view s) {
  if (s == "one-hot" || s == "onehot" || s == "one_hot") return Encoding::one_hot;
  if (s == "ordinal") return Encoding::ordinal;
  throw_usage("encoding", "unknown categorical encoding '" + std::string(s) + "'");
}

CategoricalEncoder::CategoricalEncoder(Encoding scheme, std::vector<std::string> categories)
    : scheme_(scheme), categories_(std::move(categories)) {
  std::sort(categories_.begin(), categories_.end());
  categories_.erase(std::unique(categories_.begin(), categories_.end()), categories_.end());
}

CategoricalEncoder CategoricalEncoder::fit(std::span<const std::string> values, Encoding scheme) {
  if (values.empty()) throw_usage("empty_input", "cannot fit an encoder on no values");
  return CategoricalEncoder(scheme, {values.begin(), values.end()});
}

std::size_t CategoricalEncoder::width() const {
  return scheme_ == Encoding::one_hot ? categories_.size() : 1;
}

bool CategoricalEncoder::encode(std::string_view value, std::span<double> out) const {
  auto it = std::lower_bound(categories_.begin(), categories_.end(), value);
  bool seen = it != categories_.end() && *it == value;
  auto rank = static_cast<std::size_t>(it - categories_.begin());
  if (scheme_ == Encoding::one_hot) {
    std::fill(out.begin(), out.end(), 0.0);
    if (seen) out[rank] = 1.0;
  } else {
    out[0] = seen ? static_cast<double>(rank) : -1.0;
  }
  return seen;
}

std::vector<std::string> CategoricalEncoder::column_names(std::string_view prefix) const {
  std::string base(prefix);
  if (scheme_ == Encoding::ordinal) return {base};
  std::vector<std::string> names;
  names.reserve(categories_.size());
  for (const auto& c : categories_) names.push_back(base.empty() ? c : base + "=" + c);
  return names;
}

EncodedColumns encode_categorical(std::span<const std::string> values, Encoding scheme,
                                  std::string_view prefix) {
  return encode_categorical(values, CategoricalEncoder::fit(values, scheme), prefix);
}

EncodedColumns encode_categorical(std::span<const std::string> values,
                                  const CategoricalEncoder& encoder, std::string_view prefix) {
  EncodedColumns out;
  out.encoder = encoder;
  out.names = encoder.column_names(prefix);
  out.columns = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(values.size()),
                                      static_cast<Eigen::Index>(encoder.width()));
  std::vector<double> row(encoder.width());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!encoder.encode(values[i], row)) ++out.unseen;
    for (std::size_t j = 0; j < row.size(); ++j) {
      out.columns(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
  }
  return out;
}

}  // namespace soilph
