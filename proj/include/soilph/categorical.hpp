#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace soilph {

enum class Encoding { one_hot, ordinal };

std::string_view to_string(Encoding e);
Encoding encoding_from_string(std::string_view s);

// Vocabulary fitted on training values, reused verbatim at prediction time.
// Categories are kept in lexicographic order; one-hot yields one 0/1 column
// per category, ordinal a single column holding the category rank.
class CategoricalEncoder {
 public:
  CategoricalEncoder() = default;
  CategoricalEncoder(Encoding scheme, std::vector<std::string> categories);

  // Throws Error{usage, "empty_input"} on an empty list.
  static CategoricalEncoder fit(std::span<const std::string> values, Encoding scheme);

  Encoding scheme() const { return scheme_; }
  const std::vector<std::string>& categories() const { return categories_; }
  std::size_t width() const;

  // Writes width() values into `out`. Unseen values give an all-zero row
  // (one-hot) or -1 (ordinal) and return false.
  bool encode(std::string_view value, std::span<double> out) const;
  std::vector<std::string> column_names(std::string_view prefix) const;

  bool operator==(const CategoricalEncoder&) const = default;

 private:
  Encoding scheme_ = Encoding::one_hot;
  std::vector<std::string> categories_;
};

struct EncodedColumns {
  Eigen::MatrixXd columns;
  std::vector<std::string> names;
  CategoricalEncoder encoder;
  std::size_t unseen = 0;
};

EncodedColumns encode_categorical(std::span<const std::string> values, Encoding scheme,
                                  std::string_view prefix = "");
// Applies an already fitted encoder, counting unseen categories.
EncodedColumns encode_categorical(std::span<const std::string> values,
                                  const CategoricalEncoder& encoder, std::string_view prefix = "");

}  // namespace soilph
