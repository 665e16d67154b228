#include "subpop/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "subpop/errors.hpp"
#include "subpop/json.hpp"

namespace subpop {

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_cell(std::string_view cell, std::size_t row, std::string_view column) {
  cell = trim(cell);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw ValidationError("non-numeric value '" + std::string(cell) + "' at row " +
                          std::to_string(row) + ", column '" + std::string(column) + "'");
  }
  if (!std::isfinite(value)) {
    throw ValidationError("non-finite value at row " + std::to_string(row) + ", column '" +
                          std::string(column) + "'");
  }
  return value;
}

struct Header {
  std::vector<std::string> names;
  int loss_col = -1;
  int mu_col = -1;
  std::vector<int> z_cols;  // z_cols[j] = field index of column z{j}
};

// Splits off the next line; treats both \n and \r\n as terminators.
bool next_line(std::string_view& text, std::string_view& line) {
  if (text.empty()) return false;
  const std::size_t nl = text.find('\n');
  if (nl == std::string_view::npos) {
    line = text;
    text = {};
  } else {
    line = text.substr(0, nl);
    text.remove_prefix(nl + 1);
  }
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return true;
}

Header parse_header(std::string_view line, bool strict) {
  Header h;
  std::vector<int> z_indices;
  const auto fields = split_line(line);
  for (std::size_t f = 0; f < fields.size(); ++f) {
    const std::string name(trim(fields[f]));
    for (const auto& seen : h.names) {
      if (seen == name) throw ValidationError("duplicate column '" + name + "' in header");
    }
    h.names.push_back(name);
    if (name == "loss") {
      h.loss_col = static_cast<int>(f);
    } else if (name == "mu_hat") {
      h.mu_col = static_cast<int>(f);
    } else if (name.size() > 1 && name[0] == 'z' &&
               name.find_first_not_of("0123456789", 1) == std::string::npos) {
      z_indices.push_back(std::stoi(name.substr(1)));
      h.z_cols.push_back(static_cast<int>(f));
    } else if (strict) {
      throw ValidationError("unexpected column '" + name + "' in header");
    }
  }
  if (h.loss_col < 0) throw ValidationError("missing required column 'loss'");
  if (strict) {
    if (z_indices.empty()) {
      throw ValidationError("no attribute columns: expected z0..z{d-1}");
    }
    // The z columns may appear in any file order but must cover 0..d-1.
    std::vector<int> by_index(z_indices.size(), -1);
    for (std::size_t j = 0; j < z_indices.size(); ++j) {
      const int idx = z_indices[j];
      if (idx < 0 || idx >= static_cast<int>(z_indices.size()) || by_index[idx] != -1) {
        throw ValidationError("attribute columns must be z0..z{d-1} without gaps");
      }
      by_index[idx] = h.z_cols[j];
    }
    h.z_cols = std::move(by_index);
  }
  return h;
}

}  // namespace

Dataset parse_csv(std::string_view text) {
  // Tolerate a UTF-8 byte-order mark.
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::string_view line;
  if (!next_line(text, line) || trim(line).empty()) {
    throw ValidationError("empty file: expected a CSV header");
  }
  const Header header = parse_header(line, /*strict=*/true);
  const std::size_t n_fields = header.names.size();
  const std::size_t d = header.z_cols.size();

  std::vector<double> losses;
  std::vector<double> z_flat;
  std::vector<double> mu;
  std::size_t row = 0;
  while (next_line(text, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_line(line);
    if (fields.size() != n_fields) {
      throw ValidationError("row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(n_fields));
    }
    const double loss = parse_cell(fields[header.loss_col], row, "loss");
    if (loss < 0.0) {
      throw ValidationError("negative loss at row " + std::to_string(row));
    }
    losses.push_back(loss);
    for (std::size_t j = 0; j < d; ++j) {
      z_flat.push_back(parse_cell(fields[header.z_cols[j]], row, "z" + std::to_string(j)));
    }
    if (header.mu_col >= 0) {
      mu.push_back(parse_cell(fields[header.mu_col], row, "mu_hat"));
    }
  }
  if (row == 0) throw ValidationError("no data rows");
  std::optional<std::vector<double>> external_mu;
  if (header.mu_col >= 0) external_mu = std::move(mu);
  return Dataset(std::move(losses), std::move(z_flat), d, std::move(external_mu));
}

std::vector<double> parse_loss_column(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::string_view line;
  if (!next_line(text, line) || trim(line).empty()) {
    throw ValidationError("empty file: expected a CSV header");
  }
  const Header header = parse_header(line, /*strict=*/false);
  const std::size_t n_fields = header.names.size();
  std::vector<double> losses;
  std::size_t row = 0;
  while (next_line(text, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_line(line);
    if (fields.size() != n_fields) {
      throw ValidationError("row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(n_fields));
    }
    const double loss = parse_cell(fields[header.loss_col], row, "loss");
    if (loss < 0.0) {
      throw ValidationError("negative loss at row " + std::to_string(row));
    }
    losses.push_back(loss);
  }
  if (losses.empty()) throw ValidationError("no data rows");
  return losses;
}

std::string to_csv(const Dataset& ds) {
  std::string out = "loss";
  for (std::size_t j = 0; j < ds.dim(); ++j) {
    out += ",z" + std::to_string(j);
  }
  if (ds.has_external_mu()) out += ",mu_hat";
  out += '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out += format_double(ds.loss(i));
    for (double zj : ds.z_row(i)) {
      out += ',';
      out += format_double(zj);
    }
    if (ds.has_external_mu()) {
      out += ',';
      out += format_double(ds.external_mu()[i]);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  const std::string body = to_csv(ds);
  file.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!file) throw std::runtime_error("failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw ValidationError("cannot open file '" + path + "'");
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return std::move(buffer).str();
}

Dataset load_csv(const std::string& path) { return parse_csv(read_file(path)); }

std::vector<double> load_loss_column(const std::string& path) {
  return parse_loss_column(read_file(path));
}

}  // namespace subpop
