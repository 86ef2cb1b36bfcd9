#pragma once

// RFC 4180 CSV reading and writing, dataset files and content hashes.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dmaps/manifolds.hpp"

namespace dmaps {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Shortest decimal string that reads back to the same double; empty for NaN.
std::string format_double(double v);

/// Inverse of format_double; empty fields read as NaN. Throws InvalidData.
double parse_double(std::string_view field);

/// Writes header and rows with CRLF line endings, quoting fields that contain
/// commas, quotes or line breaks.
void write_csv(std::ostream& out, const CsvTable& table);
CsvTable read_csv(std::istream& in);

CsvTable read_csv_file(const std::filesystem::path& path);
void write_csv_file(const std::filesystem::path& path, const CsvTable& table);

/// Ambient columns z1..zn (raw points) or h1..hn (histograms), followed by
/// latent_<name> columns.
CsvTable dataset_table(const Dataset& dataset);
Dataset dataset_from_table(const CsvTable& table);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Hash of the dataset's CSV serialization.
std::string dataset_hash(const Dataset& dataset);

/// Writes <path> (CSV) and <path>.json (metadata with schema version, dataset
/// hash and generator parameters).
void save_dataset(const std::filesystem::path& path, const Dataset& dataset, std::uint64_t seed);
Dataset load_dataset(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace dmaps
