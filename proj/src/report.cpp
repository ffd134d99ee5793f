#include "singdist/report.hpp"

#include <cmath>
#include <cstdio>

namespace singdist::report {

namespace {

void write(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map keeps keys sorted
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(it.key()).dump() + ": ";
        write(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        write(j[i], out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", x + 0.0);  // no "-0"
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump(const Json& j) {
  std::string out;
  write(j, out, 0);
  out += '\n';
  return out;
}

Json vector_json(const Vec& x) {
  Json a = Json::array();
  for (Index i = 0; i < x.size(); ++i) a.push_back(x[i]);
  return a;
}

Json trace_json(const std::vector<IterationRecord>& trace) {
  Json a = Json::array();
  for (const auto& t : trace) {
    a.push_back({{"iteration", t.iteration},
                 {"residual_norm", t.residual_norm},
                 {"step", t.step},
                 {"backtracks", t.backtracks},
                 {"inner_iterations", t.inner_iterations},
                 {"inner_residual", t.inner_residual},
                 {"iterative", t.iterative}});
  }
  return a;
}

Json solve_json(const SolveResult& r) {
  Json starts = Json::array();
  for (const StartSummary& s : r.starts) {
    Json j{{"k", s.k}, {"sigma", s.sigma}, {"sigma_hat", s.sigma_hat}, {"skipped", s.skipped}};
    if (!s.note.empty()) j["note"] = s.note;
    if (!s.skipped) {
      int backtracks = 0, inner = 0;
      for (const auto& t : s.trace) {
        backtracks += t.backtracks;
        inner += t.inner_iterations;
      }
      j["beta"] = s.beta;
      j["status"] = to_string(s.status);
      j["converged"] = is_converged(s.status);
      j["distance"] = s.distance;
      j["residual_norm"] = s.residual_norm;
      j["sigma_min"] = s.sigma_min;
      j["sigma_max"] = s.sigma_max;
      j["iterations"] = s.iterations;
      j["backtracks_total"] = backtracks;
      j["inner_iterations_total"] = inner;
      j["trace"] = trace_json(s.trace);
    }
    starts.push_back(std::move(j));
  }
  Json j{{"status", to_string(r.status)},
         {"converged", r.converged()},
         {"distance", r.distance},
         {"beta", r.beta},
         {"residual", {{"G_beta", r.residual_norm}, {"Av", r.residual_Av}, {"Atu", r.residual_Atu}}},
         {"iterations", r.iterations},
         {"start_index", r.start_index},
         {"starts", std::move(starts)}};
  if (r.sigma_min >= 0.0) {
    j["sigma_min"] = r.sigma_min;
    j["sigma_max"] = r.sigma_max;
    j["sigma_ratio"] = r.sigma_max > 0.0 ? r.sigma_min / r.sigma_max : 0.0;
  }
  return j;
}

Json certificate_json(const oracle::Certificate& c) {
  return {{"eps", c.eps},
          {"tol", c.tol},
          {"f_value", c.f_value},
          {"distance", c.distance},
          {"grad_norm", c.grad_norm},
          {"f_gap", c.f_gap},
          {"min_gram_diag", c.min_gram_diag},
          {"rank_drop", c.rank_drop},
          {"passed", c.passed}};
}

Json gcd_json(const gcd::GcdReport& r, bool with_coefficients) {
  Json j{{"d", r.d},
         {"distance", r.distance},
         {"reliable", r.reliable},
         {"status", to_string(r.result.status)},
         {"iterations", r.result.iterations},
         {"residual_norm", r.result.residual_norm},
         {"cofactors_extracted", r.cofactors.extracted},
         {"cofactor_residual", r.cofactors.residual}};
  if (r.result.sigma_min >= 0.0) {
    j["sigma_min"] = r.result.sigma_min;
    j["sigma_max"] = r.result.sigma_max;
  }
  if (!r.cofactors.note.empty()) j["note"] = r.cofactors.note;
  if (with_coefficients) {
    j["p_tilde"] = vector_json(r.p_tilde);
    j["q_tilde"] = vector_json(r.q_tilde);
    j["kernel_v"] = vector_json(r.result.v);
    if (r.cofactors.extracted) {
      j["g"] = vector_json(r.cofactors.g);
      j["u_cofactor"] = vector_json(r.cofactors.u);
      j["w_cofactor"] = vector_json(r.cofactors.w);
    }
  }
  return j;
}

}  // namespace singdist::report
