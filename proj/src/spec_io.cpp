#include "wedgepower/spec_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace wedgepower {

namespace {

using nlohmann::json;

class Decoder {
 public:
  std::vector<ValidationIssue> issues;

  void fail(std::string path, std::string message) { issues.push_back({std::move(path), std::move(message)}); }

  const json* section(const json& root, const std::string& name, bool required) {
    if (!root.contains(name)) {
      if (required) fail(name, "missing section");
      return nullptr;
    }
    const json& s = root.at(name);
    if (!s.is_object()) {
      fail(name, "must be an object");
      return nullptr;
    }
    return &s;
  }

  void reject_unknown(const json& obj, const std::string& prefix, const std::set<std::string>& known) {
    for (const auto& item : obj.items()) {
      if (!known.count(item.key())) fail(prefix + "." + item.key(), "unknown field");
    }
  }

  void number(const json& obj, const std::string& prefix, const char* key, double& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number()) return fail(prefix + "." + key, "must be a number");
    out = v.get<double>();
  }

  void integer(const json& obj, const std::string& prefix, const char* key, int& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) return fail(prefix + "." + key, "must be an integer");
    out = v.get<int>();
  }

  void integer_list(const json& obj, const std::string& prefix, const char* key, std::vector<int>& out,
                    bool scalar_ok) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string path = prefix + "." + key;
    if (scalar_ok && v.is_number_integer()) {
      out = {v.get<int>()};
      return;
    }
    if (!v.is_array()) return fail(path, scalar_ok ? "must be an integer or an array of integers" : "must be an array");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) {
        fail(path + "[" + std::to_string(i) + "]", "must be an integer");
        continue;
      }
      out.push_back(v[i].get<int>());
    }
  }
};

}  // namespace

Scenario decode_spec_document(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::vector<ValidationIssue>{{"", std::string("malformed JSON: ") + e.what()}});
  }
  Decoder d;
  if (!root.is_object()) throw ValidationError(std::vector<ValidationIssue>{{"", "document must be an object"}});
  d.reject_unknown(root, "", {"name", "description", "design", "correlation", "analysis"});

  Scenario out;
  out.name = root.value("name", std::string("spec"));
  if (root.contains("description") && root.at("description").is_string()) {
    out.description = root.at("description").get<std::string>();
  }
  DesignSpec& spec = out.design;

  bool kind_ok = false;
  if (const json* design = d.section(root, "design", true)) {
    d.reject_unknown(*design, "design",
                     {"kind", "clusters_per_arm", "clusters_per_step", "cluster_size", "per_group_n", "steps_k",
                      "baseline_b", "per_step_t", "means"});
    if (!design->contains("kind") || !design->at("kind").is_string()) {
      d.fail("design.kind", "missing or not a string");
    } else if (auto kind = parse_design_kind(design->at("kind").get<std::string>())) {
      spec.kind = *kind;
      kind_ok = true;
    } else {
      d.fail("design.kind", "unknown design kind '" + design->at("kind").get<std::string>() + "'");
    }
    d.integer_list(*design, "design", "clusters_per_arm", spec.clusters_per_arm, false);
    d.integer_list(*design, "design", "clusters_per_step", spec.clusters_per_step, false);
    d.integer_list(*design, "design", "cluster_size", spec.cluster_sizes, true);
    d.integer(*design, "design", "per_group_n", spec.per_group_n);
    d.integer(*design, "design", "steps_k", spec.steps_k);
    d.integer(*design, "design", "baseline_b", spec.baseline_b);
    d.integer(*design, "design", "per_step_t", spec.per_step_t);
    if (design->contains("means")) {
      const json& m = design->at("means");
      if (!m.is_array()) {
        d.fail("design.means", "must be an array");
      } else {
        for (std::size_t i = 0; i < m.size(); ++i) {
          if (m[i].is_number()) {
            spec.means.push_back(m[i].get<double>());
          } else {
            d.fail("design.means[" + std::to_string(i) + "]", "must be a number");
          }
        }
      }
    }
  }

  if (const json* c = d.section(root, "correlation", false)) {
    d.reject_unknown(*c, "correlation", {"sigma_y_sq", "icc", "cac", "sac"});
    d.number(*c, "correlation", "sigma_y_sq", out.correlation.sigma_y_sq);
    d.number(*c, "correlation", "icc", out.correlation.icc);
    d.number(*c, "correlation", "cac", out.correlation.cac);
    d.number(*c, "correlation", "sac", out.correlation.sac);
  }

  if (const json* a = d.section(root, "analysis", false)) {
    d.reject_unknown(*a, "analysis", {"alpha", "ddf_policy"});
    d.number(*a, "analysis", "alpha", spec.alpha);
    if (a->contains("ddf_policy")) {
      const json& p = a->at("ddf_policy");
      if (!p.is_string()) {
        d.fail("analysis.ddf_policy", "must be a string");
      } else if (auto policy = parse_ddf_policy(p.get<std::string>())) {
        out.ddf_policy = *policy;
      } else {
        d.fail("analysis.ddf_policy", "unknown policy '" + p.get<std::string>() + "'");
      }
    }
  }

  // Semantic checks only make sense once the shape decoded cleanly.
  if (d.issues.empty() && kind_ok) {
    for (auto& issue : validate_spec(spec)) d.issues.push_back(std::move(issue));
    for (auto& issue : validate_params(out.correlation, family_of(spec.kind))) d.issues.push_back(std::move(issue));
  }
  if (!d.issues.empty()) throw ValidationError(std::move(d.issues));
  return out;
}

Scenario load_spec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open spec file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return decode_spec_document(text.str());
}

std::string encode_spec_document(const Scenario& scenario) {
  const DesignSpec& spec = scenario.design;
  json design;
  design["kind"] = std::string(to_string(spec.kind));
  if (is_individually_randomized(spec.kind)) {
    design["per_group_n"] = spec.per_group_n;
  } else if (is_stepped_wedge(spec.kind)) {
    design["steps_k"] = spec.steps_k;
    design["baseline_b"] = spec.baseline_b;
    design["per_step_t"] = spec.per_step_t;
    design["clusters_per_step"] = spec.clusters_per_step;
  } else {
    design["clusters_per_arm"] = spec.clusters_per_arm;
  }
  if (!is_individually_randomized(spec.kind)) {
    if (spec.cluster_sizes.size() == 1) {
      design["cluster_size"] = spec.cluster_sizes.front();
    } else {
      design["cluster_size"] = spec.cluster_sizes;
    }
  }
  design["means"] = spec.means;

  json doc;
  doc["name"] = scenario.name;
  if (!scenario.description.empty()) doc["description"] = scenario.description;
  doc["design"] = design;
  doc["correlation"] = {{"sigma_y_sq", scenario.correlation.sigma_y_sq},
                        {"icc", scenario.correlation.icc},
                        {"cac", scenario.correlation.cac},
                        {"sac", scenario.correlation.sac}};
  doc["analysis"] = {{"alpha", spec.alpha}};
  if (scenario.ddf_policy) doc["analysis"]["ddf_policy"] = std::string(to_string(*scenario.ddf_policy));
  return doc.dump(2) + "\n";
}

}  // namespace wedgepower
