#include "dyscreen/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "dyscreen/error.hpp"

namespace dyscreen {
namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& cols) {
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  return out;
}

double parse_number(std::string_view tok, std::string_view column, std::size_t line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw DataError("column '" + std::string(column) + "': not a finite number: '" + std::string(tok) + "'",
                    line);
  return v;
}

bool parse_flag(std::string_view tok, std::string_view column, std::size_t line) {
  if (tok == "1" || tok == "yes" || tok == "Yes") return true;
  if (tok == "0" || tok == "no" || tok == "No") return false;
  throw DataError("column '" + std::string(column) + "': expected 0/1, got '" + std::string(tok) + "'", line);
}

void append_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

std::vector<std::string> dataset_header(const AgeVariant& variant) {
  std::vector<std::string> cols = {"id", "label"};
  for (auto& c : variant.feature_columns()) cols.push_back(std::move(c));
  return cols;
}

AgeVariant detect_variant(const std::string& header_line) {
  std::string_view line = header_line;
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  for (VariantName v : {VariantName::Full, VariantName::Young7_8, VariantName::Mid9_11, VariantName::Teen12_17}) {
    auto variant = AgeVariant::standard(v);
    if (join(dataset_header(variant)) == line) return variant;
  }
  // custom: read the qids from the clicks columns and check the rebuilt header matches
  std::vector<int> qids;
  for (auto col : split_commas(line)) {
    if (col.size() == 10 && col.starts_with('q') && col.ends_with("_clicks")) {
      int q = 0;
      std::from_chars(col.data() + 1, col.data() + 3, q);
      qids.push_back(q);
    }
  }
  if (!qids.empty()) {
    try {
      auto variant = AgeVariant::custom(qids);
      if (join(dataset_header(variant)) == line) return variant;
    } catch (const DataError&) {
    }
  }
  throw DataError("header does not match any known column layout", 1);
}

Dataset read_dataset_csv(std::istream& in, const AgeVariant& variant, LabelPolicy labels) {
  const auto header = dataset_header(variant);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError("empty dataset file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != join(header)) {
    const auto got = split_commas(line);
    if (got.size() != header.size())
      throw DataError("header has " + std::to_string(got.size()) + " columns, variant " + variant.label() +
                          " needs " + std::to_string(header.size()) + " (feature vector length " +
                          std::to_string(variant.feature_count()) + ")",
                      line_no);
    for (std::size_t i = 0; i < header.size(); ++i)
      if (got[i] != header[i])
        throw DataError("header column " + std::to_string(i + 1) + " is '" + std::string(got[i]) +
                            "', expected '" + header[i] + "'",
                        line_no);
  }

  Dataset out{variant, {}};
  const std::size_t width = variant.feature_count();
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size())
      throw DataError("row has " + std::to_string(cells.size()) + " fields, expected " +
                          std::to_string(header.size()) + " (feature vector length mismatch)",
                      line_no);

    DatasetRecord rec;
    rec.participant.id = std::string(cells[0]);
    if (cells[1].empty()) {
      if (labels == LabelPolicy::Required) throw DataError("missing label", line_no);
    } else if (auto lab = parse_label(cells[1])) {
      rec.participant.label = *lab;
    } else {
      throw DataError("unknown label token '" + std::string(cells[1]) + "' (expected dys or nodys)", line_no);
    }

    if (auto g = parse_gender(cells[2])) {
      rec.participant.gender = *g;
    } else {
      rec.participant.gender = parse_flag(cells[2], "gender", line_no) ? Gender::Male : Gender::Female;
    }
    rec.participant.native_spanish_monolingual = parse_flag(cells[3], "native", line_no);
    rec.participant.failed_language_subject = parse_flag(cells[4], "lang_fail", line_no);
    const double age = parse_number(cells[5], "age", line_no);
    if (age != std::floor(age)) throw DataError("age must be an integer", line_no);
    rec.participant.age = static_cast<int>(age);
    try {
      rec.participant.validate();
    } catch (const DataError& e) {
      throw DataError(e.what(), line_no);
    }

    rec.features.resize(width);
    rec.features[kGenderIndex] = rec.participant.gender == Gender::Male ? 1.0 : 0.0;
    rec.features[kNativeIndex] = rec.participant.native_spanish_monolingual ? 1.0 : 0.0;
    rec.features[kLangFailIndex] = rec.participant.failed_language_subject ? 1.0 : 0.0;
    rec.features[kAgeIndex] = static_cast<double>(rec.participant.age);
    for (std::size_t c = kDemographicCount; c < width; ++c)
      rec.features[c] = parse_number(cells[c + 2], header[c + 2], line_no);
    out.records.push_back(std::move(rec));
  }
  return out;
}

Dataset read_dataset_csv(const std::filesystem::path& path, const AgeVariant& variant, LabelPolicy labels) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file " + path.string());
  return read_dataset_csv(in, variant, labels);
}

void write_dataset_csv(std::ostream& out, const Dataset& dataset) {
  out << join(dataset_header(dataset.variant)) << '\n';
  std::string line;
  for (const auto& rec : dataset.records) {
    const auto& p = rec.participant;
    if (p.id.find_first_of(",\n\r") != std::string::npos)
      throw DataError("participant id '" + p.id + "' cannot be written to CSV");
    if (rec.features.size() != dataset.variant.feature_count())
      throw DataError("record '" + p.id + "' has the wrong feature count");
    line.clear();
    line += p.id;
    line += ',';
    if (p.label) line += label_token(*p.label);
    line += p.gender == Gender::Male ? ",1" : ",0";
    line += p.native_spanish_monolingual ? ",1" : ",0";
    line += p.failed_language_subject ? ",1" : ",0";
    line += ',';
    line += std::to_string(p.age);
    for (std::size_t c = kDemographicCount; c < rec.features.size(); ++c) {
      line += ',';
      append_number(line, rec.features[c]);
    }
    out << line << '\n';
  }
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset file " + path.string());
  write_dataset_csv(out, dataset);
}

}  // namespace dyscreen
