#include "lfp/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace lfp {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string dataset_to_csv(const Dataset& data) {
  std::string out;
  for (std::size_t a = 0; a < data.dim(); ++a) out += "x" + std::to_string(a + 1) + ",";
  out += "y\n";
  for (Eigen::Index i = 0; i < data.inputs().rows(); ++i) {
    for (Eigen::Index a = 0; a < data.inputs().cols(); ++a) {
      out += format_double(data.inputs()(i, a));
      out += ',';
    }
    out += format_double(data.targets()(i));
    out += '\n';
  }
  return out;
}

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, std::size_t line_no) {
  const std::string where = "dataset CSV line " + std::to_string(line_no);
  require(!cell.empty(), ErrorCode::io, where + ": empty cell");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(cell.c_str(), &end);
  require(end == cell.c_str() + cell.size() && errno != ERANGE, ErrorCode::io,
          where + ": not a number: '" + cell + "'");
  return v;
}

}  // namespace

Dataset dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) header = split(trim(line));
  }
  require(header.size() >= 2, ErrorCode::io, "dataset CSV needs a header x1..xd,y");
  const std::size_t d = header.size() - 1;
  for (std::size_t a = 0; a < d; ++a) {
    require(header[a] == "x" + std::to_string(a + 1), ErrorCode::io,
            "dataset CSV header column " + std::to_string(a + 1) + " must be x" +
                std::to_string(a + 1) + ", found '" + header[a] + "'");
  }
  require(header.back() == "y", ErrorCode::io, "dataset CSV header must end with y");

  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    require(cells.size() == d + 1, ErrorCode::io,
            "dataset CSV line " + std::to_string(line_no) + ": expected " +
                std::to_string(d + 1) + " columns, found " + std::to_string(cells.size()));
    for (const auto& cell : cells) values.push_back(parse_number(cell, line_no));
  }
  const std::size_t m = values.size() / (d + 1);
  require(m >= 1, ErrorCode::io, "dataset CSV has no samples");
  Matrix x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  Vector y(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = values[i * (d + 1) + a];
    }
    y(static_cast<Eigen::Index>(i)) = values[i * (d + 1) + d];
  }
  return Dataset(std::move(x), std::move(y));
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  write_text(path, dataset_to_csv(data));
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  return dataset_from_csv(read_text(path));
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string dataset_hash(const Dataset& data) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(dataset_to_csv(data))));
  return buf;
}

Json lattice_to_json(const FrequencyLattice& lattice) {
  return Json{{"dim", lattice.dim()},
              {"period", lattice.period()},
              {"half_width", lattice.half_width()},
              {"size", lattice.size()}};
}

Json solution_to_json(const DualSolution& sol, const Dataset& data) {
  Json j;
  j["lattice"] = lattice_to_json(*sol.lattice);
  j["A"] = sol.coeffs.a;
  j["B"] = sol.coeffs.b;
  j["epsilon"] = sol.config.epsilon;
  j["intercept_mode"] = sol.config.intercept == InterceptMode::unpenalized ? "unpenalized" : "none";
  j["alpha"] = std::vector<double>(sol.alpha.data(), sol.alpha.data() + sol.alpha.size());
  j["intercept"] = sol.intercept;
  j["rcond"] = sol.rcond;
  j["system_residual"] = sol.system_residual;
  j["dataset_hash"] = dataset_hash(data);
  return j;
}

std::string spectrum_to_csv(const SpectralSolution& s) {
  const FrequencyLattice& lat = s.lattice();
  const auto d = static_cast<std::size_t>(lat.dim());
  std::string out;
  for (std::size_t a = 0; a < d; ++a) out += "k" + std::to_string(a + 1) + ",";
  out += "re,im\n";
  auto emit = [&](std::span<const int> k, Complex v) {
    for (std::size_t a = 0; a < d; ++a) out += (k.empty() ? "0" : std::to_string(k[a])) + ",";
    out += format_double(v.real()) + "," + format_double(v.imag()) + "\n";
  };
  for (std::size_t j = 0; j < lat.half_size(); ++j) emit(lat.index(j), s.coefficient(j));
  emit({}, Complex(s.intercept(), 0.0));
  for (std::size_t j = lat.half_size(); j < lat.size(); ++j) emit(lat.index(j), s.coefficient(j));
  return out;
}

Json net_to_json(const TwoLayerNet& net) {
  Json j;
  j["dim"] = net.dim;
  j["form"] = to_string(net.form);
  j["width"] = net.width();
  j["w"] = std::vector<double>(net.w.data(), net.w.data() + net.w.size());
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < net.r.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(net.r.cols()));
    for (Eigen::Index a = 0; a < net.r.cols(); ++a) row[static_cast<std::size_t>(a)] = net.r(i, a);
    rows.push_back(row);
  }
  j["r"] = std::move(rows);
  j["l"] = std::vector<double>(net.l.data(), net.l.data() + net.l.size());
  return j;
}

TwoLayerNet net_from_json(const Json& j) {
  try {
    TwoLayerNet net;
    net.dim = j.at("dim").get<std::size_t>();
    const std::string form = j.at("form").get<std::string>();
    require(form == "general" || form == "one_d", ErrorCode::io,
            "checkpoint form must be general or one_d");
    net.form = form == "one_d" ? NetForm::one_d : NetForm::general;
    const auto w = j.at("w").get<std::vector<double>>();
    const auto l = j.at("l").get<std::vector<double>>();
    const auto r = j.at("r").get<std::vector<std::vector<double>>>();
    const std::size_t n = j.at("width").get<std::size_t>();
    require(w.size() == n && l.size() == n && r.size() == n, ErrorCode::io,
            "checkpoint arrays do not match the declared width");
    net.w = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(n));
    net.l = Eigen::Map<const Vector>(l.data(), static_cast<Eigen::Index>(n));
    net.r.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(net.dim));
    for (std::size_t i = 0; i < n; ++i) {
      require(r[i].size() == net.dim, ErrorCode::io, "checkpoint r rows must have length dim");
      for (std::size_t a = 0; a < net.dim; ++a) {
        net.r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = r[i][a];
      }
    }
    net.validate();
    return net;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::io, std::string("malformed network checkpoint: ") + e.what());
  }
}

std::string loss_history_csv(const std::vector<std::pair<std::size_t, double>>& history) {
  std::string out = "step,loss\n";
  for (const auto& [step, value] : history) {
    out += std::to_string(step) + "," + format_double(value) + "\n";
  }
  return out;
}

std::string trajectory_csv(const SpectralFlowResult& run) {
  const FrequencyLattice& lat = run.final_state.lattice();
  std::string out = "t,residual";
  for (std::size_t h : run.tracked) {
    const auto k = lat.index(lat.positive(h));
    out += ",abs_k";
    for (std::size_t a = 0; a < k.size(); ++a) out += (a ? "_" : "") + std::to_string(k[a]);
  }
  out += '\n';
  for (const auto& snap : run.history) {
    out += format_double(snap.t) + "," + format_double(snap.residual);
    for (const Complex& v : snap.tracked) out += "," + format_double(std::abs(v));
    out += '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  require(!ec, ErrorCode::io, "cannot create directory " + path.parent_path().string() + ": " +
                                  ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::io, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  require(static_cast<bool>(out), ErrorCode::io, "failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row() {
  rows_.emplace_back();
  return *this;
}

CsvTable& CsvTable::add(double value) { return add(format_double(value)); }

CsvTable& CsvTable::add(std::size_t value) { return add(std::to_string(value)); }

CsvTable& CsvTable::add(const std::string& text) {
  if (rows_.empty()) rows_.emplace_back();
  if (text.find_first_of(",\"\n") == std::string::npos) {
    rows_.back().push_back(text);
  } else {
    std::string quoted = "\"";
    for (char ch : text) {
      if (ch == '"') quoted += '"';
      quoted += ch;
    }
    rows_.back().push_back(quoted + "\"");
  }
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

}  // namespace lfp
