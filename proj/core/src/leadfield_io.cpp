#include "steer/leadfield_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "steer/numeric.hpp"

namespace steer {

namespace {

void check_finite(const Eigen::MatrixXd& matrix, const char* action) {
  for (Eigen::Index i = 0; i < matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < matrix.cols(); ++j)
      if (!std::isfinite(matrix(i, j)))
        throw IoError(std::string(action) + ": non-finite entry at row " + std::to_string(i) +
                      ", column " + std::to_string(j));
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream stream(line);
  std::string token;
  while (stream >> token) tokens.push_back(token);
  return tokens;
}

std::string expect_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(std::string("unexpected end of file, expected ") + what);
  return line;
}

double metadata_number(const std::vector<std::string>& tokens, size_t index,
                       const std::string& key) {
  if (index >= tokens.size()) throw ParseError("metadata line '" + key + "' is missing a value");
  return parse_double(tokens[index]);
}

}  // namespace

void export_leadfield(const LeadField& field, std::ostream& out) {
  check_finite(field.matrix, "export_leadfield");
  if (field.row_count() != 3 * field.position_count())
    throw DimensionError("export_leadfield: rows (" + std::to_string(field.row_count()) +
                         ") are not 3 x positions (" + std::to_string(field.position_count()) +
                         ")");
  out << "LEADFIELD v1 N=" << field.row_count() << " K=" << field.contact_count() << "\n";
  for (Eigen::Index i = 0; i < field.matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < field.matrix.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(field.matrix(i, j));
    }
    out << "\n";
  }
  out << "METADATA\n";
  out << "provenance " << (field.provenance == Provenance::synthetic ? "synthetic" : "imported")
      << "\n";
  out << "conductivity " << format_double(field.conductivity_s_m) << "\n";
  out << "model " << (field.contacts.model.empty() ? "custom" : field.contacts.model) << "\n";
  out << "lead_diameter " << format_double(field.contacts.lead_diameter_mm) << "\n";
  out << "impedance " << format_double(field.contacts.impedance_kohm) << "\n";
  out << "contacts " << field.contact_count() << "\n";
  for (const Contact& c : field.contacts.contacts) {
    out << "contact " << c.label << ' ' << c.row << ' ' << c.sector << ' '
        << format_double(c.center.x()) << ' ' << format_double(c.center.y()) << ' '
        << format_double(c.center.z()) << ' ' << format_double(c.outward_normal.x()) << ' '
        << format_double(c.outward_normal.y()) << ' ' << format_double(c.outward_normal.z())
        << "\n";
  }
  const char* res = field.grid.resolution == GridResolution::low
                        ? "low"
                        : field.grid.resolution == GridResolution::high ? "high" : "custom";
  out << "resolution " << res << "\n";
  out << "positions " << field.position_count() << "\n";
  for (const Vec3& p : field.grid.positions)
    out << "position " << format_double(p.x()) << ' ' << format_double(p.y()) << ' '
        << format_double(p.z()) << "\n";
  out << "END\n";
  if (!out) throw IoError("export_leadfield: write failed");
}

void export_leadfield(const LeadField& field, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  export_leadfield(field, out);
}

LeadField import_leadfield(std::istream& in) {
  const std::string header = expect_line(in, "header");
  auto tokens = split_ws(header);
  if (tokens.size() != 4 || tokens[0] != "LEADFIELD" || tokens[1] != "v1" ||
      tokens[2].rfind("N=", 0) != 0 || tokens[3].rfind("K=", 0) != 0)
    throw ParseError("malformed lead field header: '" + header +
                     "' (expected 'LEADFIELD v1 N=<rows> K=<cols>')");
  int n = 0, k = 0;
  try {
    n = static_cast<int>(parse_double(tokens[2].substr(2)));
    k = static_cast<int>(parse_double(tokens[3].substr(2)));
  } catch (const ParseError&) {
    throw ParseError("malformed lead field header dimensions: '" + header + "'");
  }
  if (n <= 0 || k <= 0 || n % 3 != 0)
    throw ParseError("lead field header needs positive dimensions with N divisible by 3, got N=" +
                     std::to_string(n) + " K=" + std::to_string(k));

  LeadField field;
  field.matrix.resize(n, k);
  for (int i = 0; i < n; ++i) {
    auto row = split_ws(expect_line(in, "matrix row"));
    if (static_cast<int>(row.size()) != k)
      throw ParseError("matrix row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                       " values, expected " + std::to_string(k));
    for (int j = 0; j < k; ++j) {
      double value;
      try {
        value = parse_double(row[j]);
      } catch (const ParseError&) {
        throw ParseError("matrix row " + std::to_string(i) + ", column " + std::to_string(j) +
                         ": malformed value '" + row[j] + "'");
      }
      if (!std::isfinite(value))
        throw ParseError("non-finite entry at row " + std::to_string(i) + ", column " +
                         std::to_string(j));
      field.matrix(i, j) = value;
    }
  }

  if (expect_line(in, "METADATA") != "METADATA")
    throw ParseError("expected METADATA block after the matrix");
  field.contacts.model.clear();
  bool saw_end = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line == "END") {
      saw_end = true;
      break;
    }
    auto meta = split_ws(line);
    if (meta.empty()) continue;
    const std::string& key = meta[0];
    if (key == "provenance") {
      if (meta.size() < 2) throw ParseError("metadata line 'provenance' is missing a value");
      if (meta[1] == "synthetic") field.provenance = Provenance::synthetic;
      else if (meta[1] == "imported") field.provenance = Provenance::imported;
      else throw ParseError("unknown provenance '" + meta[1] + "'");
    } else if (key == "conductivity") {
      field.conductivity_s_m = metadata_number(meta, 1, key);
    } else if (key == "model") {
      if (meta.size() < 2) throw ParseError("metadata line 'model' is missing a value");
      field.contacts.model = meta[1] == "custom" ? "" : meta[1];
    } else if (key == "lead_diameter") {
      field.contacts.lead_diameter_mm = metadata_number(meta, 1, key);
    } else if (key == "impedance") {
      field.contacts.impedance_kohm = metadata_number(meta, 1, key);
    } else if (key == "contacts") {
      if (static_cast<int>(metadata_number(meta, 1, key)) != k)
        throw ParseError("metadata contact count does not match K=" + std::to_string(k));
    } else if (key == "contact") {
      if (meta.size() != 10)
        throw ParseError("contact metadata line needs 9 fields, got " +
                         std::to_string(meta.size() - 1));
      Contact c;
      c.label = meta[1];
      c.row = static_cast<int>(metadata_number(meta, 2, key));
      c.sector = static_cast<int>(metadata_number(meta, 3, key));
      c.center = Vec3(metadata_number(meta, 4, key), metadata_number(meta, 5, key),
                      metadata_number(meta, 6, key));
      c.outward_normal = Vec3(metadata_number(meta, 7, key), metadata_number(meta, 8, key),
                              metadata_number(meta, 9, key));
      field.contacts.contacts.push_back(c);
    } else if (key == "resolution") {
      if (meta.size() < 2) throw ParseError("metadata line 'resolution' is missing a value");
      field.grid.resolution = meta[1] == "low" ? GridResolution::low
                              : meta[1] == "high" ? GridResolution::high
                                                  : GridResolution::custom;
    } else if (key == "positions") {
      if (static_cast<int>(metadata_number(meta, 1, key)) * 3 != n)
        throw ParseError("metadata position count does not match N=" + std::to_string(n));
    } else if (key == "position") {
      if (meta.size() != 4) throw ParseError("position metadata line needs 3 coordinates");
      field.grid.positions.emplace_back(metadata_number(meta, 1, key),
                                        metadata_number(meta, 2, key),
                                        metadata_number(meta, 3, key));
    } else {
      throw ParseError("unknown metadata key '" + key + "'");
    }
  }
  if (!saw_end) throw ParseError("metadata block not terminated by END");
  if (field.grid.row_count() != n)
    throw ParseError("metadata lists " + std::to_string(field.grid.position_count()) +
                     " positions for N=" + std::to_string(n) + " rows");
  if (field.contacts.count() != k)
    throw ParseError("metadata lists " + std::to_string(field.contacts.count()) +
                     " contacts for K=" + std::to_string(k));
  validate_contact_array(field.contacts);
  validate_grid(field.grid);
  return field;
}

LeadField import_leadfield(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return import_leadfield(in);
}

void export_matrix_csv(const Eigen::MatrixXd& matrix, std::ostream& out) {
  check_finite(matrix, "export_matrix_csv");
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (j) out << ',';
      out << format_double(matrix(i, j));
    }
    out << "\n";
  }
  if (!out) throw IoError("export_matrix_csv: write failed");
}

void export_matrix_csv(const Eigen::MatrixXd& matrix, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  export_matrix_csv(matrix, out);
}

Eigen::MatrixXd import_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream stream(line);
    std::string cell;
    int column = 0;
    while (std::getline(stream, cell, ',')) {
      try {
        row.push_back(parse_double(cell));
      } catch (const ParseError&) {
        throw ParseError("csv line " + std::to_string(line_number) + ", column " +
                         std::to_string(column) + ": malformed value '" + cell + "'");
      }
      if (!std::isfinite(row.back()))
        throw ParseError("csv line " + std::to_string(line_number) + ", column " +
                         std::to_string(column) + ": non-finite value");
      ++column;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("csv line " + std::to_string(line_number) + " has " +
                       std::to_string(row.size()) + " values, expected " +
                       std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty csv matrix");
  Eigen::MatrixXd matrix(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) matrix(i, j) = rows[i][j];
  return matrix;
}

Eigen::MatrixXd import_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return import_matrix_csv(in);
}

}  // namespace steer
