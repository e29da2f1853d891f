#include "mrpchan/config.hpp"

#include <cstdio>
#include <fstream>

#include "mrpchan/error.hpp"

namespace mrpchan {

using nlohmann::json;

namespace {

template <class T>
T field(const json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string(where) + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string(where) + ": bad field '" + key + "': " + e.what());
  }
}

cplx complex_from_json(const json& j, const char* where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) return {j[0].get<double>(), j[1].get<double>()};
  throw InputError(std::string(where) + ": expected a number or [re, im]");
}

json complex_to_json(cplx c) {
  if (c.imag() == 0.0) return c.real();
  return json::array({c.real(), c.imag()});
}

std::vector<std::string> states_of(const json& j) {
  auto s = field<std::vector<std::string>>(j, "states", "kernel");
  if (s.empty()) throw InputError("kernel: no states");
  return s;
}

std::size_t state_index(const std::vector<std::string>& states, const json& entry, const char* key) {
  const auto label = field<std::string>(entry, key, "transition");
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == label) return i;
  throw InputError("unknown state '" + label + "'");
}

const json& list(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw InputError(std::string("kernel: missing list '") + key + "'");
  return j.at(key);
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string ModelConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(document.dump())));
  return buf;
}

ExpPoly density_from_json(const json& j) {
  if (!j.is_object()) throw InputError("density: expected an object");
  if (j.contains("exponential")) {
    const auto& e = j.at("exponential");
    const double rate = field<double>(e, "rate", "exponential");
    if (!(rate > 0.0)) throw InputError("exponential: rate must be positive");
    return e.contains("weight") ? ExpPoly::exponential(rate, field<double>(e, "weight", "exponential"))
                                : ExpPoly::exponential(rate);
  }
  if (j.contains("erlang")) {
    const auto& e = j.at("erlang");
    const int shape = field<int>(e, "shape", "erlang");
    const double rate = field<double>(e, "rate", "erlang");
    if (shape < 1 || !(rate > 0.0)) throw InputError("erlang: need shape >= 1 and rate > 0");
    return ExpPoly::erlang(shape, rate);
  }
  if (j.contains("terms")) {
    std::vector<ExpTerm> terms;
    for (const auto& t : j.at("terms")) {
      ExpTerm term;
      term.coeff = complex_from_json(t.at("coeff"), "term coeff");
      term.power = t.value("power", 0);
      term.rate = complex_from_json(t.at("rate"), "term rate");
      if (term.power < 0) throw InputError("term: negative power");
      terms.push_back(term);
    }
    return ExpPoly(std::move(terms));
  }
  throw InputError("density: expected 'exponential', 'erlang' or 'terms'");
}

json density_to_json(const ExpPoly& f) {
  json terms = json::array();
  for (const auto& t : f.terms())
    terms.push_back({{"coeff", complex_to_json(t.coeff)}, {"power", t.power}, {"rate", complex_to_json(t.rate)}});
  return {{"terms", terms}};
}

SemiMarkovKernel kernel_from_json(const json& j) {
  const auto states = states_of(j);
  const std::size_t n = states.size();
  const auto construction = field<std::string>(j, "construction", "kernel");
  try {
    if (construction == "generator") {
      GeneratorSpec g{states, Eigen::MatrixXd::Zero(n, n)};
      for (const auto& e : list(j, "rates")) {
        const auto y = state_index(states, e, "from"), z = state_index(states, e, "to");
        if (y == z) throw InputError("generator: self-transition rate on '" + states[y] + "'");
        g.rates(y, z) += field<double>(e, "rate", "rate");
      }
      return smk_from_generator(g);
    }
    DensityMatrix q(n, std::vector<ExpPoly>(n));
    if (construction == "conditional") {
      Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
      for (const auto& e : list(j, "transitions")) {
        const auto y = state_index(states, e, "from"), z = state_index(states, e, "to");
        P(y, z) = field<double>(e, "p", "transition");
        q[y][z] = density_from_json(e.at("density"));
      }
      return smk_from_conditional(states, P, q);
    }
    const char* key = construction == "competing" ? "clocks" : "densities";
    if (construction != "competing" && construction != "explicit")
      throw InputError("kernel: unknown construction '" + construction + "'");
    for (const auto& e : list(j, key)) {
      if (!e.contains("density")) throw InputError("kernel: entry without density");
      q[state_index(states, e, "from")][state_index(states, e, "to")] = density_from_json(e.at("density"));
    }
    if (construction == "competing") return smk_from_competing(states, q);
    return SemiMarkovKernel(states, std::move(q));
  } catch (const json::exception& e) {
    throw InputError(std::string("kernel: ") + e.what());
  }
}

json kernel_to_json(const SemiMarkovKernel& k) {
  json entries = json::array();
  for (std::size_t y = 0; y < k.size(); ++y)
    for (std::size_t z = 0; z < k.size(); ++z)
      if (!k.q(y, z).is_zero())
        entries.push_back({{"from", k.label(y)}, {"to", k.label(z)}, {"density", density_to_json(k.q(y, z))}});
  return {{"states", k.states()}, {"construction", "explicit"}, {"densities", entries}};
}

MarginalSpec marginal_from_json(const SemiMarkovKernel& k, const json& j) {
  MarginalSpec m{TransitionClassMap(k.size(), j.value("default_class", -1)), {}};
  if (j.contains("classes"))
    for (const auto& e : j.at("classes"))
      m.classes.set(state_index(k.states(), e, "from"), state_index(k.states(), e, "to"), field<int>(e, "class", "class"));
  m.coarse = field<std::map<std::string, std::string>>(j, "marks", "marginal");
  return m;
}

json marginal_to_json(const SemiMarkovKernel& k, const MarginalSpec& m) {
  json classes = json::array();
  for (std::size_t y = 0; y < k.size(); ++y)
    for (std::size_t z = 0; z < k.size(); ++z)
      if (m.classes(y, z) >= 0) classes.push_back({{"from", k.label(y)}, {"to", k.label(z)}, {"class", m.classes(y, z)}});
  return {{"classes", classes}, {"marks", m.coarse}};
}

json channel_to_json(const Channel& c) {
  json joint = marginal_to_json(c.kernel, c.joint);
  joint["targets"] = c.joint_targets;
  json output = marginal_to_json(c.kernel, c.output);
  output["targets"] = c.output_targets;
  return {{"schema", kConfigSchema}, {"kind", "channel"}, {"name", c.name}, {"kernel", kernel_to_json(c.kernel)},
          {"joint", joint}, {"output", output}, {"initial", c.initial}};
}

json static_model_to_json(const StaticModel& m, const std::vector<std::string>& names) {
  if (names.size() != m.blocks.size()) throw InputError("one name per block needed");
  json blocks = json::array();
  for (std::size_t b = 0; b < m.blocks.size(); ++b) blocks.push_back({{"name", names[b]}, {"kernel", kernel_to_json(m.blocks[b])}});
  return {{"schema", kConfigSchema}, {"kind", "static"}, {"blocks", blocks}, {"initial", m.initial},
          {"start", m.stationary_start ? "stationary" : "arrival"}};
}

ModelConfig parse_config(const json& j) {
  if (!j.is_object()) throw InputError("config: expected a JSON object");
  const int schema = field<int>(j, "schema", "config");
  if (schema != kConfigSchema) throw InputError("config: unsupported schema " + std::to_string(schema));
  ModelConfig out;
  out.kind = j.value("kind", "channel");
  if (out.kind == "channel") {
    Channel& c = out.channel;
    c.name = j.value("name", "config");
    c.kernel = kernel_from_json(field<json>(j, "kernel", "config"));
    const auto joint = field<json>(j, "joint", "config");
    const auto output = field<json>(j, "output", "config");
    c.joint = marginal_from_json(c.kernel, joint);
    c.output = marginal_from_json(c.kernel, output);
    c.joint_targets = field<std::vector<std::string>>(joint, "targets", "joint");
    c.output_targets = field<std::vector<std::string>>(output, "targets", "output");
    c.initial = field<std::string>(j, "initial", "config");
    c.kernel.index(c.initial);
  } else if (out.kind == "static") {
    StaticModel& m = out.static_model;
    for (const auto& b : field<json>(j, "blocks", "config")) {
      out.block_names.push_back(field<std::string>(b, "name", "block"));
      m.blocks.push_back(kernel_from_json(field<json>(b, "kernel", "block")));
    }
    if (m.blocks.empty()) throw InputError("config: static model without blocks");
    for (const auto& b : m.blocks)
      if (b.states() != m.blocks.front().states()) throw InputError("config: blocks must share their states");
    m.initial = field<std::string>(j, "initial", "config");
    m.blocks.front().index(m.initial);
    const auto start = j.value("start", "arrival");
    if (start != "arrival" && start != "stationary") throw InputError("config: start must be 'arrival' or 'stationary'");
    m.stationary_start = start == "stationary";
  } else {
    throw InputError("config: unknown kind '" + out.kind + "'");
  }
  out.document = j;
  return out;
}

ModelConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

ModelConfig builtin_config(const std::string& name) {
  if (name == "gene-static") {
    const StaticModel m = gene_static_model(GeneModelParams{});
    return parse_config(static_model_to_json(m, {"R=1", "R=10"}));
  }
  return parse_config(channel_to_json(channel_by_name(name)));
}

}  // namespace mrpchan
