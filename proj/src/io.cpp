#include "coinfect/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "coinfect/version.hpp"
#include "json.hpp"

namespace coinfect::io {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string RunMeta::config_hash() const {
  return hex64(fnv1a64(command + "|" + params_to_json(params) + "|" + config + "|" +
                       std::to_string(seed)));
}

std::string RunMeta::csv_header() const {
  std::ostringstream os;
  os << "# coinfect " << kVersion << "\n";
  os << "# command=" << command << "\n";
  os << "# config=" << config << "\n";
  os << "# config_hash=" << config_hash() << "\n";
  os << "# seed=" << seed << "\n";
  os << "# params=" << params_to_json(params) << "\n";
  return os.str();
}

namespace {

nlohmann::ordered_json meta_json_obj(const RunMeta& m) {
  nlohmann::ordered_json j;
  j["tool"] = "coinfect";
  j["version"] = kVersion;
  j["command"] = m.command;
  j["config"] = m.config;
  j["config_hash"] = m.config_hash();
  j["seed"] = m.seed;
  j["params"] = nlohmann::ordered_json::parse(params_to_json(m.params));
  return j;
}

}  // namespace

std::string RunMeta::json_meta() const { return meta_json_obj(*this).dump(); }

std::string branch_to_csv(const Branch& b, const RunMeta& meta) {
  std::ostringstream os;
  os << meta.csv_header();
  os << "K,type,S,I1,I2,I12";
  for (int i = 1; i <= 4; ++i) os << ",re_lambda" << i;
  for (int i = 1; i <= 4; ++i) os << ",im_lambda" << i;
  os << ",stable\n";
  for (const BranchSample& s : b.samples) {
    os << fmt(s.K) << ',' << to_string(s.eq.type) << ',' << fmt(s.eq.point.S) << ','
       << fmt(s.eq.point.I1) << ',' << fmt(s.eq.point.I2) << ',' << fmt(s.eq.point.I12);
    for (const auto& z : s.stab.eigenvalues) os << ',' << fmt(z.real());
    for (const auto& z : s.stab.eigenvalues) os << ',' << fmt(z.imag());
    os << ',' << to_string(s.stab.classification) << '\n';
  }
  return os.str();
}

std::string events_to_json(const Branch& b, const RunMeta& meta) {
  nlohmann::ordered_json j;
  j["meta"] = meta_json_obj(meta);
  j["events"] = nlohmann::ordered_json::array();
  for (const BranchEvent& e : b.events) {
    nlohmann::ordered_json je;
    switch (e.kind) {
      case BranchEvent::Kind::Transition:
        je["kind"] = "transition";
        je["K"] = e.K;
        je["from"] = to_string(e.from);
        je["to"] = to_string(e.to);
        je["K_predicted"] = e.K_predicted;
        break;
      case BranchEvent::Kind::HopfOnset:
        je["kind"] = "hopf_onset";
        je["K_c"] = e.K;
        break;
      case BranchEvent::Kind::AssumptionBreak:
        je["kind"] = "assumption_break";
        je["K"] = e.K;
        je["which"] = e.which;
        break;
    }
    j["events"].push_back(je);
  }
  return j.dump(2) + "\n";
}

std::string trajectory_to_csv(const Trajectory& t, const RunMeta& meta) {
  std::ostringstream os;
  os << meta.csv_header();
  os << "# accepted=" << t.stats.accepted << " rejected=" << t.stats.rejected
     << " max_error=" << fmt(t.stats.max_error) << "\n";
  os << "t,S,I1,I2,I12,R\n";
  for (std::size_t i = 0; i < t.times.size(); ++i) {
    const State& s = t.states[i];
    os << fmt(t.times[i]) << ',' << fmt(s.S) << ',' << fmt(s.I1) << ',' << fmt(s.I2) << ','
       << fmt(s.I12) << ',' << fmt(s.R) << '\n';
  }
  return os.str();
}

std::string scenario_to_json(const Scenario& s, const RunMeta& meta) {
  nlohmann::ordered_json j;
  j["meta"] = meta_json_obj(meta);
  j["tag"] = to_string(s.tag);
  j["transitions"] = nlohmann::ordered_json::array();
  for (const PredictedTransition& tr : s.predicted) {
    nlohmann::ordered_json jt;
    jt["K"] = tr.K;
    jt["from"] = to_string(tr.from);
    jt["to"] = to_string(tr.to);
    j["transitions"].push_back(jt);
  }
  return j.dump(2) + "\n";
}

std::string derived_to_json(const DerivedQuantities& d, const std::vector<AssumptionCheck>& checks,
                            const RunMeta& meta) {
  nlohmann::ordered_json j;
  j["meta"] = meta_json_obj(meta);
  nlohmann::ordered_json jd;
  jd["sigma1"] = d.sigma1;
  jd["sigma2"] = d.sigma2;
  jd["sigma3"] = d.sigma3;
  jd["A1"] = d.A1;
  jd["A2"] = d.A2;
  jd["A3"] = d.A3;
  jd["eta1star"] = d.eta1star;
  jd["eta2star"] = d.eta2star;
  jd["gammastar"] = d.gammastar;
  jd["gammabar"] = d.gammabar;
  jd["deltaAlpha"] = d.deltaAlpha;
  jd["deltaMu"] = d.deltaMu;
  jd["rhoDet"] = d.rhoDet;
  jd["thetaDet"] = d.thetaDet;
  j["derived"] = jd;
  j["assumptions"] = nlohmann::ordered_json::array();
  for (const AssumptionCheck& c : checks) {
    nlohmann::ordered_json jc;
    jc["name"] = c.name;
    jc["holds"] = c.holds;
    jc["value"] = c.value;
    j["assumptions"].push_back(jc);
  }
  return j.dump(2) + "\n";
}

std::string equilibria_to_json(const std::vector<Equilibrium>& eqs,
                               const std::vector<StabilityReport>& reps, double K,
                               const RunMeta& meta) {
  nlohmann::ordered_json j;
  j["meta"] = meta_json_obj(meta);
  j["K"] = K;
  j["equilibria"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < eqs.size(); ++i) {
    const Equilibrium& e = eqs[i];
    nlohmann::ordered_json je;
    je["type"] = to_string(e.type);
    je["S"] = e.point.S;
    je["I1"] = e.point.I1;
    je["I2"] = e.point.I2;
    je["I12"] = e.point.I12;
    je["residual"] = e.residual;
    je["dpds_warning"] = e.dpds_warning;
    je["classification"] = to_string(reps[i].classification);
    je["max_real_part"] = reps[i].max_real_part;
    auto re = nlohmann::ordered_json::array();
    auto im = nlohmann::ordered_json::array();
    for (const auto& z : reps[i].eigenvalues) {
      re.push_back(z.real());
      im.push_back(z.imag());
    }
    je["eigenvalues_re"] = re;
    je["eigenvalues_im"] = im;
    j["equilibria"].push_back(je);
  }
  return j.dump(2) + "\n";
}

std::string hopf_to_json(const HopfResult& h, const RunMeta& meta) {
  nlohmann::ordered_json j;
  j["meta"] = meta_json_obj(meta);
  j["found"] = h.found;
  if (h.found) {
    j["K_c"] = h.K_c;
    j["re_at_Kc"] = h.re_at_Kc;
    j["pair_im"] = h.pair_im;
    j["transversality"] = h.transversality;
    j["fd_step"] = h.fd_step;
  }
  j["marginal"] = h.marginal;
  return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
}

}  // namespace coinfect::io
