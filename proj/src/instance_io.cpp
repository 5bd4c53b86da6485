#include "branchhull/instance_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace branchhull {

namespace {

using nlohmann::json;

void append_vector(std::string& out, const Vector& v) {
  out += '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  out += ']';
}

void append_matrix(std::string& out, const Matrix& a) {
  out += '[';
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    if (r) out += ",\n    ";
    out += '[';
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      if (c) out += ',';
      out += format_double(a(r, c));
    }
    out += ']';
  }
  out += ']';
}

Vector parse_vector(const json& j, const char* name, Eigen::Index expected) {
  if (!j.is_array()) throw std::runtime_error(std::string(name) + ": expected array");
  if (static_cast<Eigen::Index>(j.size()) != expected)
    throw std::runtime_error(std::string(name) + ": wrong length");
  Vector v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v[i] = j[i].get<double>();
  return v;
}

Matrix parse_matrix(const json& j, const char* name, Eigen::Index rows,
                    Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw std::runtime_error(std::string(name) + ": expected " +
                             std::to_string(rows) + " rows");
  Matrix a(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw std::runtime_error(std::string(name) + ": ragged row " +
                               std::to_string(r));
    for (Eigen::Index c = 0; c < cols; ++c) a(r, c) = row[c].get<double>();
  }
  return a;
}

}  // namespace

std::string format_double(double x) {
  if (!std::isfinite(x))
    throw std::invalid_argument("cannot serialize a non-finite value");
  char buf[64];
  auto [end, ec] =
      std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

std::string instance_to_json(const ProblemInstance& instance,
                             const GroundTruth* truth) {
  instance.validate();
  std::string out = "{\n";
  out += "  \"K\": " + std::to_string(instance.K()) + ",\n";
  out += "  \"N\": " + std::to_string(instance.N()) + ",\n";
  out += "  \"L\": " + std::to_string(instance.L()) + ",\n";
  out += "  \"B\": ";
  append_matrix(out, instance.B);
  out += ",\n  \"C\": ";
  append_matrix(out, instance.C);
  out += ",\n  \"y\": ";
  append_vector(out, instance.y);
  out += ",\n  \"s\": [";
  for (int l = 0; l < instance.L(); ++l) {
    if (l) out += ',';
    out += std::to_string(static_cast<int>(instance.s[l]));
  }
  out += "],\n  \"seed\": " + std::to_string(instance.seed) + ",\n";
  out += "  \"noise\": {\"kind\": \"" + std::string(to_string(instance.noise.kind)) +
         "\", \"alpha\": " + format_double(instance.noise.alpha) +
         ", \"epsilon\": " + format_double(instance.noise.epsilon) + "}";
  if (truth) {
    out += ",\n  \"truth\": {\"h\": ";
    append_vector(out, truth->h);
    out += ", \"m\": ";
    append_vector(out, truth->m);
    out += ", \"xi\": ";
    append_vector(out, truth->xi);
    out += ", \"y_hat\": ";
    append_vector(out, truth->y_hat);
    out += "}";
  }
  out += "\n}\n";
  return out;
}

std::pair<ProblemInstance, std::optional<GroundTruth>> instance_from_json(
    const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("instance JSON: ") + e.what());
  }
  try {
    const int K = doc.at("K").get<int>();
    const int N = doc.at("N").get<int>();
    const int L = doc.at("L").get<int>();
    if (K < 1 || N < 1 || L < 1)
      throw std::runtime_error("instance JSON: dimensions must be positive");

    ProblemInstance inst;
    inst.B = parse_matrix(doc.at("B"), "B", L, K);
    inst.C = parse_matrix(doc.at("C"), "C", L, N);
    inst.y = parse_vector(doc.at("y"), "y", L);
    inst.s = parse_vector(doc.at("s"), "s", L);
    if (doc.contains("seed")) inst.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("noise")) {
      const json& nz = doc["noise"];
      inst.noise.kind = noise_kind_from_string(nz.value("kind", "none"));
      inst.noise.alpha = nz.value("alpha", 0.0);
      inst.noise.epsilon = nz.value("epsilon", 0.0);
    }
    inst.validate();

    std::optional<GroundTruth> truth;
    if (doc.contains("truth") && !doc["truth"].is_null()) {
      const json& t = doc["truth"];
      GroundTruth g;
      g.h = parse_vector(t.at("h"), "truth.h", K);
      g.m = parse_vector(t.at("m"), "truth.m", N);
      g.xi = t.contains("xi") ? parse_vector(t["xi"], "truth.xi", L)
                              : Vector::Zero(L);
      g.y_hat = t.contains("y_hat")
                    ? parse_vector(t["y_hat"], "truth.y_hat", L)
                    : Vector((inst.B * g.h).cwiseProduct(inst.C * g.m));
      truth = std::move(g);
    }
    return {std::move(inst), std::move(truth)};
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("instance JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("instance JSON: ") + e.what());
  }
}

void write_instance(const std::string& path, const ProblemInstance& instance,
                    const GroundTruth* truth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << instance_to_json(instance, truth);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::pair<ProblemInstance, std::optional<GroundTruth>> read_instance(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return instance_from_json(buf.str());
}

}  // namespace branchhull
