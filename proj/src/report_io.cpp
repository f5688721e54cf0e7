#include "corec/report_io.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace corec {

using nlohmann::json;

namespace {

json matrix_to_json_entry(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const cxd& z = m.at(i, j);
      if (m.is_real()) {
        row.push_back(z.real());
      } else {
        row.push_back(json::array({z.real(), z.imag()}));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json_entry(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw FormatError("cochain value: expected a nested array of rows");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  bool complex_seen = false;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != cols) {
      throw FormatError("cochain value: ragged rows");
    }
    for (const auto& e : row) {
      if (e.is_array()) complex_seen = true;
    }
  }
  Matrix m(rows, cols, complex_seen ? Field::Complex : Field::Real);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& e = j[i][c];
      if (e.is_number()) {
        m.at(i, c) = cxd(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2) {
        m.at(i, c) = cxd(e[0].get<double>(), e[1].get<double>());
      } else {
        throw FormatError("cochain value: entry must be number or [re, im]");
      }
    }
  }
  return m;
}

std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json report_to_json(const RectifyReport& rep, std::uint64_t seed,
                    const RectifySettings& settings, bool include_timestamp) {
  json j;
  j["schema"] = 1;
  j["status"] = status_name(rep.status);
  j["iterations"] = rep.iterations;
  j["defect_trace"] = rep.defect_trace;
  j["fitted_K"] = rep.fitted_k;
  j["fitted_order"] = rep.fitted_order;
  j["fit_valid"] = rep.fit_valid;
  j["final_defect"] = rep.final_defect;
  j["distance"] = rep.distance;
  j["seed"] = seed;
  j["settings"] = {{"tol", settings.tol},
                   {"max_iter", settings.max_iter},
                   {"input_defect_max", settings.input_defect_max},
                   {"ad_bound_max", settings.ad_bound_max},
                   {"stagnation_window", settings.stagnation_window},
                   {"eval_seed", settings.eval_seed},
                   {"lie_random_tuples", settings.lie_random_tuples},
                   {"lie_node_tuple_cap", settings.lie_node_tuple_cap}};
  j["eval_provenance"] = rep.eval_provenance;
  j["worst_tuple"] = rep.worst_tuple;
  if (!rep.gate_reason.empty()) j["gate_reason"] = rep.gate_reason;
  if (rep.near_coboundary_valid) {
    j["near_coboundary_residual"] = rep.near_coboundary_residual;
  }
  if (include_timestamp) {
    const auto now = std::chrono::system_clock::now();
    j["timestamp"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            now.time_since_epoch())
            .count();
  }
  return j;
}

std::string trace_csv(const RectifyReport& rep) {
  std::ostringstream os;
  os << "iteration,defect\n";
  for (std::size_t k = 0; k < rep.defect_trace.size(); ++k) {
    os << k << "," << csv_double(rep.defect_trace[k]) << "\n";
  }
  return os.str();
}

json sweep_to_json(const SweepResult& res) {
  json rows = json::array();
  for (const auto& r : res.rows) {
    json row = {{"epsilon", r.epsilon},
                {"final_defect", r.final_defect},
                {"distance", r.distance},
                {"fitted_order", r.fitted_order},
                {"status", r.failed ? std::string("Failed")
                                    : status_name(r.status)}};
    if (r.failed) row["error"] = r.error;
    rows.push_back(std::move(row));
  }
  return {{"schema", 1},
          {"rows", rows},
          {"slope", res.slope},
          {"slope_valid", res.slope_valid},
          {"c_hu_max", res.c_hu_max}};
}

std::string sweep_csv(const SweepResult& res) {
  std::ostringstream os;
  os << "epsilon,final_defect,distance,fitted_order,status\n";
  for (const auto& r : res.rows) {
    os << csv_double(r.epsilon) << "," << csv_double(r.final_defect) << ","
       << csv_double(r.distance) << "," << csv_double(r.fitted_order) << ","
       << (r.failed ? std::string("Failed") : status_name(r.status)) << "\n";
  }
  return os.str();
}

json cochain_to_json(const Cochain& c) {
  if (!c.tabulated()) {
    throw PreconditionError("cochain_to_json: only tabulated cochains serialize");
  }
  json values = json::array();
  for (const auto& m : c.table()) values.push_back(matrix_to_json_entry(m));
  return {{"schema", 1}, {"arity", c.arity()}, {"values", values}};
}

Cochain cochain_from_json(const json& j, const CompactGroupPtr& g,
                          const TargetGroupPtr& t, const GActionPtr& a) {
  if (!j.is_object() || j.value("schema", 0) != 1) {
    throw FormatError("cochain file: missing or unsupported schema version");
  }
  int arity = 0;
  std::vector<Matrix> table;
  try {
    arity = j.at("arity").get<int>();
    for (const auto& v : j.at("values")) {
      table.push_back(matrix_from_json_entry(v));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("cochain file: ") + e.what());
  }
  if (arity < 0) throw FormatError("cochain file: negative arity");
  std::size_t expect = 1;
  for (int i = 0; i < arity; ++i) expect *= std::size_t(g->order);
  if (table.size() != expect) {
    std::ostringstream os;
    os << "cochain file: expected " << expect << " values for arity " << arity
       << " over order " << g->order << ", got " << table.size();
    throw FormatError(os.str());
  }
  return Cochain::from_table(arity, g, t, a, std::move(table),
                             ValueSpace::GroupValued);
}

void atomic_write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  try {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
  fs::rename(tmp, target);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace corec
