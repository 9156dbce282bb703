#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wedgepower/wedgepower.hpp"

namespace py = pybind11;
namespace wp = wedgepower;

namespace {

// A preset name, or a JSON spec document.
wp::Scenario scenario_from(const std::string& source) {
  if (!source.empty() && source.front() == '{') return wp::decode_spec_document(source);
  auto found = wp::find_preset(source);
  if (!found) throw py::value_error("unknown preset '" + source + "'");
  return *found;
}

std::optional<wp::DdfPolicy> policy_from(const std::optional<std::string>& name) {
  if (!name) return std::nullopt;
  auto p = wp::parse_ddf_policy(*name);
  if (!p) throw py::value_error("unknown ddf policy '" + *name + "'");
  return p;
}

py::dict effect_dict(const wp::DesignEffectResult& r) {
  py::dict d;
  d["de"] = r.de;
  d["clustering_factor"] = r.clustering_factor;
  d["repeated_factor"] = r.repeated_factor;
  d["r"] = r.r ? py::cast(*r.r) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Power and design effects for cluster randomized and stepped wedge trials";

  py::register_exception<wp::DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<wp::InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
  py::register_exception<wp::ValidationError>(m, "ValidationError", PyExc_ValueError);

  m.def("central_f_cdf", &wp::central_f_cdf, py::arg("x"), py::arg("ndf"), py::arg("ddf"));
  m.def("central_f_quantile", &wp::central_f_quantile, py::arg("p"), py::arg("ndf"), py::arg("ddf"));
  m.def("noncentral_f_cdf", &wp::noncentral_f_cdf, py::arg("x"), py::arg("ndf"), py::arg("ddf"), py::arg("lam"));
  m.def(
      "power_from_f",
      [](double f, int ndf, int ddf, double alpha) {
        const auto r = wp::power_from_f(f, ndf, ddf, alpha);
        return py::dict(py::arg("fvalue") = r.fvalue, py::arg("ndf") = r.ndf, py::arg("ddf") = r.ddf,
                        py::arg("lambda") = r.lambda, py::arg("fcrit") = r.fcrit, py::arg("power") = r.power,
                        py::arg("alpha") = r.alpha);
      },
      py::arg("fvalue"), py::arg("ndf"), py::arg("ddf"), py::arg("alpha") = 0.05);

  m.def("de_simple", [](double n, double icc) { return effect_dict(wp::de_simple(n, icc)); }, py::arg("n"),
        py::arg("icc"));
  m.def(
      "de_ancova_prepost",
      [](double n, double icc, double cac, double sac) { return effect_dict(wp::de_ancova_prepost(n, icc, cac, sac)); },
      py::arg("n"), py::arg("icc"), py::arg("cac"), py::arg("sac") = 0.0);
  m.def(
      "de_stepped_wedge",
      [](int k, int b, int t, double n, double icc) { return effect_dict(wp::de_stepped_wedge(k, b, t, n, icc)); },
      py::arg("k"), py::arg("b"), py::arg("t"), py::arg("n"), py::arg("icc"));
  m.def(
      "de_three_measurement",
      [](double n, double icc, double cac, double sac) {
        return effect_dict(wp::de_three_measurement(n, icc, cac, sac));
      },
      py::arg("n"), py::arg("icc"), py::arg("cac"), py::arg("sac"));

  m.def("preset_names", [] {
    std::vector<std::string> names;
    for (const auto& s : wp::presets()) names.push_back(s.name);
    return names;
  });
  m.def("preset_document", [](const std::string& name) { return wp::encode_spec_document(scenario_from(name)); },
        py::arg("name"));

  m.def(
      "analytic_power",
      [](const std::string& source, std::optional<std::string> ddf_policy) {
        const auto s = scenario_from(source);
        const auto policy = ddf_policy ? policy_from(ddf_policy) : s.ddf_policy;
        const auto r = wp::analytic_power(s.design, s.correlation, policy);
        py::dict d;
        d["fvalue"] = r.result.fvalue;
        d["ndf"] = r.result.ndf;
        d["ddf"] = r.result.ddf;
        d["lambda"] = r.result.lambda;
        d["fcrit"] = r.result.fcrit;
        d["power"] = r.result.power;
        d["alpha"] = r.result.alpha;
        d["ddf_policy"] = std::string(wp::to_string(r.ddf_policy));
        d["observations"] = r.observations;
        d["beta"] = r.beta;
        d["columns"] = r.column_names;
        return d;
      },
      py::arg("spec"), py::arg("ddf_policy") = py::none());

  m.def(
      "empirical_power",
      [](const std::string& source, long replicates, std::uint64_t seed, unsigned threads) {
        const auto s = scenario_from(source);
        wp::SimulationPlan plan;
        plan.spec = s.design;
        plan.params = s.correlation;
        plan.policy = s.ddf_policy;
        plan.replicates = replicates;
        plan.seed = seed;
        plan.threads = threads;
        wp::EmpiricalPower e;
        {
          py::gil_scoped_release release;
          e = wp::empirical_power(plan);
        }
        return py::dict(py::arg("estimate") = e.estimate, py::arg("replicates") = e.replicates,
                        py::arg("rejections") = e.rejections, py::arg("mc_stderr") = e.mc_stderr,
                        py::arg("ci95") = e.ci95, py::arg("fcrit") = e.fcrit, py::arg("ndf") = e.ndf,
                        py::arg("ddf") = e.ddf);
      },
      py::arg("spec"), py::arg("replicates") = 1000, py::arg("seed") = 1, py::arg("threads") = 0);

  m.def(
      "dataset_csv", [](const std::string& source) { return wp::dataset_to_csv(wp::exemplary_dataset(scenario_from(source).design)); },
      py::arg("spec"));

  m.def(
      "cluster_covariance",
      [](const std::string& source, int cluster_index, bool correlation) {
        const auto s = scenario_from(source);
        if (cluster_index < 1 || cluster_index > s.design.total_clusters()) throw py::index_error("cluster index out of range");
        const auto comps = wp::derive_components(s.correlation, wp::family_of(s.design.kind));
        const auto block = wp::build_cluster_v(wp::cluster_shape(s.design, cluster_index - 1), comps);
        return correlation ? wp::vcorr(block) : Eigen::MatrixXd(block.cluster_matrix);
      },
      py::arg("spec"), py::arg("cluster_index") = 1, py::arg("correlation") = false);
}
