#include "dmaps/io.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "dmaps/error.hpp"

namespace dmaps {
namespace {

constexpr int kDatasetSchemaVersion = 1;
constexpr std::string_view kLatentPrefix = "latent_";

bool needs_quotes(std::string_view f) { return f.find_first_of(",\"\r\n") != std::string_view::npos; }

void write_field(std::ostream& out, std::string_view f) {
  if (!needs_quotes(f)) {
    out << f;
    return;
  }
  out << '"';
  for (const char c : f) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void write_record(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t c = 0; c < fields.size(); ++c) {
    if (c) out << ',';
    write_field(out, fields[c]);
  }
  out << "\r\n";
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field) {
  if (field.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw InvalidData("not a number: '" + std::string(field) + "'");
  }
  return v;
}

void write_csv(std::ostream& out, const CsvTable& table) {
  write_record(out, table.header);
  for (const auto& row : table.rows) write_record(out, row);
}

CsvTable read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  char c = 0;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && in.peek() == '\n') in.get(c);
      end_record();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw InvalidData("csv: unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  if (records.empty()) throw InvalidData("csv: missing header");

  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw InvalidData("csv: row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                        " fields, header has " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidData("cannot open " + path.string());
  return read_csv(in);
}

void write_csv_file(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidData("cannot write " + path.string());
  write_csv(out, table);
}

CsvTable dataset_table(const Dataset& dataset) {
  const ObservationSet& obs = dataset.observations;
  const char prefix = obs.kind() == ObservationKind::Histograms ? 'h' : 'z';
  CsvTable table;
  for (Eigen::Index c = 0; c < obs.dims(); ++c) table.header.push_back(prefix + std::to_string(c + 1));
  for (const auto& name : dataset.latent_names) table.header.push_back(std::string(kLatentPrefix) + name);
  table.rows.reserve(static_cast<std::size_t>(obs.rows()));
  for (Eigen::Index i = 0; i < obs.rows(); ++i) {
    std::vector<std::string> row;
    row.reserve(table.header.size());
    for (Eigen::Index c = 0; c < obs.dims(); ++c) row.push_back(format_double(obs.vectors()(i, c)));
    for (Eigen::Index c = 0; c < dataset.latent.cols(); ++c) row.push_back(format_double(dataset.latent(i, c)));
    table.rows.push_back(std::move(row));
  }
  return table;
}

Dataset dataset_from_table(const CsvTable& table) {
  std::vector<std::size_t> ambient;
  std::vector<std::size_t> latent;
  std::vector<std::string> latent_names;
  int histogram_columns = 0;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const std::string& h = table.header[c];
    if (h.rfind(kLatentPrefix, 0) == 0) {
      latent.push_back(c);
      latent_names.push_back(h.substr(kLatentPrefix.size()));
    } else {
      if (!latent.empty()) throw InvalidData("dataset csv: ambient column '" + h + "' after latent columns");
      if (!h.empty() && h[0] == 'h') ++histogram_columns;
      ambient.push_back(c);
    }
  }
  if (ambient.empty()) throw InvalidData("dataset csv has no ambient columns");
  const bool histograms = histogram_columns == static_cast<int>(ambient.size());
  const auto m = static_cast<Eigen::Index>(table.rows.size());
  RowMatrix x(m, static_cast<Eigen::Index>(ambient.size()));
  Eigen::MatrixXd lat(m, static_cast<Eigen::Index>(latent.size()));
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    for (std::size_t c = 0; c < ambient.size(); ++c) x(i, static_cast<Eigen::Index>(c)) = parse_double(row[ambient[c]]);
    for (std::size_t c = 0; c < latent.size(); ++c) lat(i, static_cast<Eigen::Index>(c)) = parse_double(row[latent[c]]);
  }
  return Dataset{ObservationSet(std::move(x), histograms ? ObservationKind::Histograms : ObservationKind::RawPoints),
                 std::move(lat), std::move(latent_names), {}};
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string dataset_hash(const Dataset& dataset) {
  std::ostringstream out;
  write_csv(out, dataset_table(dataset));
  return fnv1a_hex(out.str());
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset, std::uint64_t seed) {
  std::ostringstream csv;
  write_csv(csv, dataset_table(dataset));
  const std::string text = csv.str();
  write_text_file(path, text);

  nlohmann::ordered_json meta;
  meta["schema_version"] = kDatasetSchemaVersion;
  meta["kind"] = dataset.observations.kind() == ObservationKind::Histograms ? "histograms" : "raw_points";
  meta["rows"] = dataset.observations.rows();
  meta["ambient_dims"] = dataset.observations.dims();
  meta["latent"] = dataset.latent_names;
  meta["seed"] = seed;
  meta["dataset_hash"] = fnv1a_hex(text);
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [k, v] : dataset.metadata) params[k] = v;
  meta["generator"] = params;
  write_text_file(path.string() + ".json", meta.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& path) {
  Dataset ds = dataset_from_table(read_csv_file(path));
  const std::filesystem::path sidecar = path.string() + ".json";
  if (std::filesystem::exists(sidecar)) {
    const auto meta = nlohmann::json::parse(read_text_file(sidecar), nullptr, false);
    if (meta.is_discarded()) throw InvalidData("malformed metadata " + sidecar.string());
    if (meta.contains("generator") && meta["generator"].is_object()) {
      for (const auto& [k, v] : meta["generator"].items()) {
        ds.metadata.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
      }
    }
  }
  return ds;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidData("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidData("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace dmaps
