#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "pgspec/logit_model.hpp"

namespace pgspec {

inline constexpr std::size_t kCreditAttributes = 20;

// One line of the UCI german.data file: attributes A1..A20 as written
// (categorical codes such as "A11", integers as text) and the outcome code
// (1 = creditworthy, 2 = not).
struct RawCreditRecord {
  std::array<std::string, kCreditAttributes> values;
  int outcome = 0;
};

// Parse whitespace-separated records, 21 fields per line. Blank lines are
// skipped. With expected_records > 0 the record count is enforced.
std::vector<RawCreditRecord> parse_german_data(std::istream& input, std::size_t expected_records = 1000);

struct AttributeEncoding {
  enum class Kind { kNumeric, kCategorical };
  Kind kind = Kind::kNumeric;
  std::string name;
  // Categorical only: levels[0] is the reference level and gets no column.
  std::vector<std::string> levels;
};

struct EncodingSpec {
  std::array<AttributeEncoding, kCreditAttributes> attributes;
  bool intercept = true;
  bool standardize_numeric = false;

  // Column layout: [intercept], numeric attributes in file order, then the
  // indicator blocks of the categorical attributes in file order.
  std::size_t column_count() const;
  std::vector<std::string> column_names() const;
};

// Codes observed in german.data (the codebook's A47 and A95 never occur);
// 1 + 7 + 41 = 49 columns.
EncodingSpec german_encoding(bool standardize_numeric = false);

Dataset encode(const std::vector<RawCreditRecord>& records, const EncodingSpec& spec);

// Recover the categorical codes of an encoded row (numeric entries are
// returned as empty strings).
std::array<std::string, kCreditAttributes> decode_categorical(const Vector& row, const EncodingSpec& spec);

// Hash of the design matrix and response bytes.
std::uint64_t dataset_fingerprint(const Dataset& data);

Dataset load_german_dataset(const std::string& path, bool standardize_numeric = false);

}  // namespace pgspec
