#include "pgspec/credit_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string_view>

#include "pgspec/errors.hpp"

namespace pgspec {

namespace {

bool parse_int(const std::string& text, long& out) {
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

AttributeEncoding numeric(std::string name) { return {AttributeEncoding::Kind::kNumeric, std::move(name), {}}; }

AttributeEncoding categorical(std::string name, std::vector<std::string> levels) {
  return {AttributeEncoding::Kind::kCategorical, std::move(name), std::move(levels)};
}

}  // namespace

std::vector<RawCreditRecord> parse_german_data(std::istream& input, std::size_t expected_records) {
  std::vector<RawCreditRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (tokens.size() != kCreditAttributes + 1) {
      std::ostringstream os;
      os << "line " << line_no << ": expected " << kCreditAttributes + 1 << " fields, found " << tokens.size();
      fail(ErrorCode::kParse, os.str());
    }
    RawCreditRecord rec;
    std::copy_n(tokens.begin(), kCreditAttributes, rec.values.begin());
    long outcome = 0;
    if (!parse_int(tokens.back(), outcome) || (outcome != 1 && outcome != 2)) {
      std::ostringstream os;
      os << "line " << line_no << ": outcome must be 1 or 2, found '" << tokens.back() << "'";
      fail(ErrorCode::kParse, os.str());
    }
    rec.outcome = static_cast<int>(outcome);
    records.push_back(std::move(rec));
  }
  if (records.empty()) fail(ErrorCode::kValidation, "german data: no records found");
  if (expected_records > 0 && records.size() != expected_records) {
    std::ostringstream os;
    os << "german data: expected " << expected_records << " records, found " << records.size();
    fail(ErrorCode::kValidation, os.str());
  }
  return records;
}

std::size_t EncodingSpec::column_count() const {
  std::size_t cols = intercept ? 1 : 0;
  for (const auto& attr : attributes) {
    cols += attr.kind == AttributeEncoding::Kind::kNumeric ? 1 : attr.levels.size() - 1;
  }
  return cols;
}

std::vector<std::string> EncodingSpec::column_names() const {
  std::vector<std::string> names;
  if (intercept) names.emplace_back("intercept");
  for (const auto& attr : attributes) {
    if (attr.kind == AttributeEncoding::Kind::kNumeric) names.push_back(attr.name);
  }
  for (const auto& attr : attributes) {
    if (attr.kind != AttributeEncoding::Kind::kCategorical) continue;
    for (std::size_t k = 1; k < attr.levels.size(); ++k) names.push_back(attr.name + "=" + attr.levels[k]);
  }
  return names;
}

EncodingSpec german_encoding(bool standardize_numeric) {
  EncodingSpec spec;
  spec.standardize_numeric = standardize_numeric;
  spec.attributes = {
      categorical("checking_status", {"A11", "A12", "A13", "A14"}),
      numeric("duration_months"),
      categorical("credit_history", {"A30", "A31", "A32", "A33", "A34"}),
      categorical("purpose", {"A40", "A41", "A42", "A43", "A44", "A45", "A46", "A48", "A49", "A410"}),
      numeric("credit_amount"),
      categorical("savings", {"A61", "A62", "A63", "A64", "A65"}),
      categorical("employment_since", {"A71", "A72", "A73", "A74", "A75"}),
      numeric("installment_rate"),
      categorical("personal_status_sex", {"A91", "A92", "A93", "A94"}),
      categorical("other_debtors", {"A101", "A102", "A103"}),
      numeric("residence_since"),
      categorical("property", {"A121", "A122", "A123", "A124"}),
      numeric("age_years"),
      categorical("other_installment_plans", {"A141", "A142", "A143"}),
      categorical("housing", {"A151", "A152", "A153"}),
      numeric("existing_credits"),
      categorical("job", {"A171", "A172", "A173", "A174"}),
      numeric("people_liable"),
      categorical("telephone", {"A191", "A192"}),
      categorical("foreign_worker", {"A201", "A202"}),
  };
  return spec;
}

Dataset encode(const std::vector<RawCreditRecord>& records, const EncodingSpec& spec) {
  if (records.empty()) fail(ErrorCode::kValidation, "encode: no records");
  const auto n = static_cast<Eigen::Index>(records.size());
  const auto p = static_cast<Eigen::Index>(spec.column_count());
  Matrix X = Matrix::Zero(n, p);
  Eigen::VectorXi y(n);

  Eigen::Index first_numeric = spec.intercept ? 1 : 0;
  Eigen::Index first_indicator = first_numeric;
  for (const auto& attr : spec.attributes) {
    if (attr.kind == AttributeEncoding::Kind::kNumeric) ++first_indicator;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const RawCreditRecord& rec = records[static_cast<std::size_t>(i)];
    if (spec.intercept) X(i, 0) = 1.0;
    Eigen::Index numeric_col = first_numeric;
    Eigen::Index indicator_col = first_indicator;
    for (std::size_t a = 0; a < kCreditAttributes; ++a) {
      const AttributeEncoding& attr = spec.attributes[a];
      const std::string& value = rec.values[a];
      if (attr.kind == AttributeEncoding::Kind::kNumeric) {
        long v = 0;
        if (!parse_int(value, v)) {
          std::ostringstream os;
          os << "record " << (i + 1) << ": attribute " << attr.name << " is not an integer ('" << value << "')";
          fail(ErrorCode::kEncoding, os.str());
        }
        X(i, numeric_col++) = static_cast<double>(v);
        continue;
      }
      const auto it = std::find(attr.levels.begin(), attr.levels.end(), value);
      if (it == attr.levels.end()) {
        std::ostringstream os;
        os << "record " << (i + 1) << ": unseen code '" << value << "' for attribute " << attr.name;
        fail(ErrorCode::kEncoding, os.str());
      }
      const auto level = static_cast<Eigen::Index>(it - attr.levels.begin());
      if (level > 0) X(i, indicator_col + level - 1) = 1.0;
      indicator_col += static_cast<Eigen::Index>(attr.levels.size()) - 1;
    }
    y[i] = rec.outcome == 1 ? 1 : 0;
  }

  if (spec.standardize_numeric) {
    for (Eigen::Index c = first_numeric; c < first_indicator; ++c) {
      const double mean = X.col(c).mean();
      const double sd = std::sqrt((X.col(c).array() - mean).square().sum() / static_cast<double>(n - 1));
      if (sd > 0.0) X.col(c) = (X.col(c).array() - mean) / sd;
    }
  }
  return Dataset(std::move(X), std::move(y));
}

std::array<std::string, kCreditAttributes> decode_categorical(const Vector& row, const EncodingSpec& spec) {
  if (row.size() != static_cast<Eigen::Index>(spec.column_count())) {
    fail(ErrorCode::kInvalidArgument, "decode_categorical: row length does not match the encoding");
  }
  std::array<std::string, kCreditAttributes> codes;
  Eigen::Index col = spec.intercept ? 1 : 0;
  for (const auto& attr : spec.attributes) {
    if (attr.kind == AttributeEncoding::Kind::kNumeric) ++col;
  }
  for (std::size_t a = 0; a < kCreditAttributes; ++a) {
    const AttributeEncoding& attr = spec.attributes[a];
    if (attr.kind != AttributeEncoding::Kind::kCategorical) continue;
    std::size_t level = 0;
    for (std::size_t k = 1; k < attr.levels.size(); ++k) {
      if (row[col + static_cast<Eigen::Index>(k) - 1] == 1.0) {
        if (level != 0) fail(ErrorCode::kEncoding, "decode_categorical: two indicators set for " + attr.name);
        level = k;
      }
    }
    codes[a] = attr.levels[level];
    col += static_cast<Eigen::Index>(attr.levels.size()) - 1;
  }
  return codes;
}

std::uint64_t dataset_fingerprint(const Dataset& data) {
  const auto* x_bytes = reinterpret_cast<const char*>(data.X().data());
  const auto* y_bytes = reinterpret_cast<const char*>(data.y().data());
  std::string buffer(x_bytes, x_bytes + data.X().size() * sizeof(double));
  buffer.append(y_bytes, y_bytes + data.y().size() * sizeof(int));
  return std::hash<std::string_view>{}(buffer);
}

Dataset load_german_dataset(const std::string& path, bool standardize_numeric) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  return encode(parse_german_data(in), german_encoding(standardize_numeric));
}

}  // namespace pgspec
