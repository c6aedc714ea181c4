#include <fstream>
#include <sstream>
#include <string>

#include "dnaembed/channel.hpp"
#include "dnaembed/errors.hpp"

namespace dnaembed {
namespace {

constexpr const char* kHeader = "s,t,d,homologous";

[[noreturn]] void bad_row(const std::filesystem::path& path, std::size_t line_no,
                          const std::string& why) {
  throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + why, line_no);
}

}  // namespace

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write dataset " + path.string());
  out << kHeader << '\n';
  for (const auto& p : ds.samples) {
    out << p.s.str() << ',' << p.t.str() << ',' << p.d << ',' << (p.homologous ? 1 : 0) << '\n';
  }
}

Dataset load_dataset(const std::filesystem::path& path, std::size_t padded_len, DatasetRole role,
                     bool verify_distances) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open dataset " + path.string());
  Dataset ds;
  ds.padded_len = padded_len;
  ds.role = role;

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) bad_row(path, line_no, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) bad_row(path, line_no, "expected header '" + std::string(kHeader) + "'");

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 4) bad_row(path, line_no, "expected 4 fields");

    PairSample p;
    try {
      p.s = parse_seq(fields[0]);
      p.t = parse_seq(fields[1]);
    } catch (const ParseError& e) {
      bad_row(path, line_no, e.what());
    }
    if (fields[2].empty() || fields[2].find_first_not_of("0123456789") != std::string::npos) {
      bad_row(path, line_no, "distance '" + fields[2] + "' is not a non-negative integer");
    }
    p.d = std::stoull(fields[2]);
    if (fields[3] != "0" && fields[3] != "1") {
      bad_row(path, line_no, "homologous flag must be 0 or 1");
    }
    p.homologous = fields[3] == "1";
    if (p.s.size() > padded_len || p.t.size() > padded_len) {
      bad_row(path, line_no, "sequence exceeds padded length " + std::to_string(padded_len));
    }
    if (verify_distances && levenshtein(p.s, p.t) != p.d) {
      bad_row(path, line_no, "stored distance does not match the sequences");
    }
    ds.samples.push_back(std::move(p));
  }
  return ds;
}

}  // namespace dnaembed
