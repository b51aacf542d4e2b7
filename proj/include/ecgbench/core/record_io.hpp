#pragma once

#include <filesystem>
#include <string>

#include "ecgbench/core/record.hpp"

namespace ecgbench {

enum class RecordFormat { Csv, PackedBinary };

/// Picks the format from the extension: `.csv` or `.bin`.
RecordFormat format_from_path(const std::filesystem::path& path);

// CSV layout:
//   # id=<record id>
//   # sampling_rate=<Hz>
//   I,II,III,aVR,aVL,aVF,V1,V2,V3,V4,V5,V6
//   <12 comma-separated millivolt values per time step>
//
// Packed binary layout: one line of compact JSON
//   {"id":..,"sampling_rate":..,"leads":[..12 labels..],"sample_count":N}
// terminated by '\n', then 12*N little-endian float32 values, lead-major.

EcgRecord read_record(const std::filesystem::path& path, RecordFormat format);
EcgRecord read_record(const std::filesystem::path& path);
void write_record(const EcgRecord& record, const std::filesystem::path& path, RecordFormat format);
void write_record(const EcgRecord& record, const std::filesystem::path& path);

EcgRecord parse_csv_record(const std::string& text);
std::string format_csv_record(const EcgRecord& record);
EcgRecord parse_binary_record(const std::string& bytes);
std::string format_binary_record(const EcgRecord& record);

/// Little-endian float32 helpers shared by the binary formats.
void append_le_float(std::string& out, float value);
float read_le_float(const char* p);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace ecgbench
