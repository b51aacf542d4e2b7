#include "ecgbench/core/record_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ecgbench/core/errors.hpp"

namespace ecgbench {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

RecordFormat format_from_path(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return RecordFormat::Csv;
  if (ext == ".bin") return RecordFormat::PackedBinary;
  throw FormatError("unknown record extension '" + ext + "' (expected .csv or .bin)");
}

void append_le_float(std::string& out, float value) {
  auto bits = std::bit_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

float read_le_float(const char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) {
    bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return std::bit_cast<float>(bits);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

EcgRecord parse_csv_record(const std::string& text) {
  std::string id = "record";
  int rate = EcgRecord::kDefaultSamplingRate;
  std::vector<Lead> order;
  std::vector<std::vector<float>> columns;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    std::string_view line(text.data() + pos, (end == std::string::npos ? text.size() : end) - pos);
    pos = end == std::string::npos ? text.size() + 1 : end + 1;
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '#') {
      auto body = trim(line.substr(1));
      auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      auto key = trim(body.substr(0, eq));
      auto value = trim(body.substr(eq + 1));
      if (key == "id") {
        id = std::string(value);
      } else if (key == "sampling_rate") {
        auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), rate);
        if (ec != std::errc{} || p != value.data() + value.size()) {
          throw FormatError("line " + std::to_string(line_no) + ": bad sampling_rate '" +
                            std::string(value) + "'");
        }
      }
      continue;
    }

    auto fields = split(line, ',');
    if (order.empty()) {
      for (auto f : fields) {
        auto lead = parse_lead(f);
        if (!lead) throw FormatError("header: unknown lead label '" + std::string(f) + "'");
        order.push_back(*lead);
      }
      if (order.size() != kLeadCount) {
        throw FormatError("header: expected 12 leads, got " + std::to_string(order.size()));
      }
      for (std::size_t i = 0; i < kLeadCount; ++i) {
        if (order[i] != kAllLeads[i]) {
          throw FormatError("header: lead " + std::string(lead_name(order[i])) +
                            " out of canonical order at column " + std::to_string(i + 1));
        }
      }
      columns.assign(kLeadCount, {});
      continue;
    }

    if (fields.size() != kLeadCount) {
      throw FormatError("row " + std::to_string(line_no) + ": expected 12 values, got " +
                        std::to_string(fields.size()));
    }
    for (std::size_t i = 0; i < kLeadCount; ++i) {
      float v = 0.0f;
      auto f = fields[i];
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || p != f.data() + f.size()) {
        throw FormatError("row " + std::to_string(line_no) + ", lead " +
                          std::string(lead_name(kAllLeads[i])) + ": bad value '" + std::string(f) +
                          "'");
      }
      columns[i].push_back(v);
    }
  }
  if (order.empty()) throw FormatError("missing lead header row");
  return EcgRecord(std::move(id), rate, std::move(columns));
}

std::string format_csv_record(const EcgRecord& record) {
  std::string out;
  out += "# id=" + record.id() + "\n";
  out += "# sampling_rate=" + std::to_string(record.sampling_rate()) + "\n";
  for (std::size_t i = 0; i < kLeadCount; ++i) {
    if (i) out += ',';
    out += lead_name(kAllLeads[i]);
  }
  out += '\n';
  char buf[32];
  for (std::size_t t = 0; t < record.sample_count(); ++t) {
    for (std::size_t i = 0; i < kLeadCount; ++i) {
      if (i) out += ',';
      // shortest representation that round-trips exactly
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, record.samples()[i][t]);
      out.append(buf, p);
    }
    out += '\n';
  }
  return out;
}

EcgRecord parse_binary_record(const std::string& bytes) {
  auto nl = bytes.find('\n');
  if (nl == std::string::npos) throw FormatError("binary record: missing JSON header line");
  json header;
  try {
    header = json::parse(bytes.substr(0, nl));
  } catch (const json::exception& e) {
    throw FormatError(std::string("binary record: bad header: ") + e.what());
  }
  std::string id = header.value("id", std::string("record"));
  const int rate = header.value("sampling_rate", EcgRecord::kDefaultSamplingRate);
  const auto leads = header.value("leads", std::vector<std::string>{});
  const auto n = header.value("sample_count", std::size_t{0});
  if (leads.size() != kLeadCount) {
    throw FormatError("binary record: expected 12 leads, got " + std::to_string(leads.size()));
  }
  for (std::size_t i = 0; i < kLeadCount; ++i) {
    auto l = parse_lead(leads[i]);
    if (!l || *l != kAllLeads[i]) {
      throw FormatError("binary record: lead '" + leads[i] + "' at position " +
                        std::to_string(i + 1) + " is not canonical");
    }
  }
  const std::size_t payload = bytes.size() - nl - 1;
  if (payload != kLeadCount * n * 4) {
    throw FormatError("binary record: payload holds " + std::to_string(payload) +
                      " bytes, header implies " + std::to_string(kLeadCount * n * 4));
  }
  std::vector<std::vector<float>> samples(kLeadCount, std::vector<float>(n));
  const char* p = bytes.data() + nl + 1;
  for (std::size_t i = 0; i < kLeadCount; ++i) {
    for (std::size_t t = 0; t < n; ++t, p += 4) samples[i][t] = read_le_float(p);
  }
  return EcgRecord(std::move(id), rate, std::move(samples));
}

std::string format_binary_record(const EcgRecord& record) {
  json header;
  header["id"] = record.id();
  header["sampling_rate"] = record.sampling_rate();
  std::vector<std::string> leads;
  for (auto l : kAllLeads) leads.emplace_back(lead_name(l));
  header["leads"] = leads;
  header["sample_count"] = record.sample_count();
  std::string out = header.dump() + "\n";
  out.reserve(out.size() + kLeadCount * record.sample_count() * 4);
  for (const auto& lead : record.samples()) {
    for (float v : lead) append_le_float(out, v);
  }
  return out;
}

EcgRecord read_record(const fs::path& path, RecordFormat format) {
  const auto bytes = read_file(path);
  return format == RecordFormat::Csv ? parse_csv_record(bytes) : parse_binary_record(bytes);
}

EcgRecord read_record(const fs::path& path) { return read_record(path, format_from_path(path)); }

void write_record(const EcgRecord& record, const fs::path& path, RecordFormat format) {
  write_file(path, format == RecordFormat::Csv ? format_csv_record(record)
                                               : format_binary_record(record));
}

void write_record(const EcgRecord& record, const fs::path& path) {
  write_record(record, path, format_from_path(path));
}

}  // namespace ecgbench
