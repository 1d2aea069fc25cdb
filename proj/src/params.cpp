#include "coinfect/params.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace coinfect {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError("invalid parameters: " + msg);
}

}  // namespace

void ModelParams::validate() const {
  for (double v : {r, K, alpha1, alpha2, alpha3, eta1, eta2, gamma1, gamma2, mu1, mu2, mu3,
                   rho1, rho2, rho3, mu4p}) {
    require(std::isfinite(v), "non-finite field");
  }
  require(r > 0, "r must be positive");
  require(K > 0, "K must be positive");
  require(alpha1 > 0 && alpha2 > 0 && alpha3 > 0, "alpha_i must be positive");
  require(mu1 > 0 && mu2 > 0 && mu3 > 0, "mu_i must be positive");
  require(mu4p > 0, "mu4p must be positive");
  require(eta1 >= 0 && eta2 >= 0, "eta_i must be nonnegative");
  require(gamma1 >= 0 && gamma2 >= 0, "gamma_i must be nonnegative");
  require(rho1 >= 0 && rho2 >= 0 && rho3 >= 0, "rho_i must be nonnegative");
  require(mu1 >= rho1 && mu2 >= rho2 && mu3 >= rho3, "mu_i >= rho_i required (d_i = mu_i - rho_i)");
}

DerivedQuantities derive(const ModelParams& p) {
  p.validate();
  DerivedQuantities d;
  d.sigma1 = p.mu1 / p.alpha1;
  d.sigma2 = p.mu2 / p.alpha2;
  d.sigma3 = p.mu3 / p.alpha3;
  if (!(d.sigma1 < d.sigma2 && d.sigma2 < d.sigma3)) {
    std::ostringstream os;
    os << "sigma = (" << d.sigma1 << ", " << d.sigma2 << ", " << d.sigma3 << ")";
    throw AssumptionViolation("sigma_ordering", os.str());
  }
  d.A1 = p.alpha1 * p.alpha3 * (d.sigma3 - d.sigma1) / p.r;
  d.A2 = p.alpha2 * p.alpha3 * (d.sigma3 - d.sigma2) / p.r;
  d.A3 = p.alpha1 * p.alpha2 * (d.sigma2 - d.sigma1) / p.r;
  if (!(d.A1 > 0 && d.A2 > 0 && d.A3 > 0)) {
    throw AssumptionViolation("A_positive", "some A_i is not positive");
  }
  d.eta1star = p.eta1 / d.A1;
  d.eta2star = p.eta2 / d.A2;
  d.gammastar = p.gamma1 / d.A3;
  d.gammabar = p.gamma1 + p.gamma2;
  d.deltaAlpha = p.eta1 * p.alpha2 - p.eta2 * p.alpha1;
  d.deltaMu = p.eta1 * p.mu2 - p.eta2 * p.mu1;
  if (d.deltaAlpha == 0.0) {
    throw AssumptionViolation("deltaAlpha_nonzero", "eta1*alpha2 == eta2*alpha1");
  }
  d.rhoDet = p.gamma1 * p.alpha1 * p.eta2 + p.gamma2 * p.alpha2 * p.eta1 -
             p.gamma1 * p.gamma2 * p.alpha3;
  d.thetaDet =
      p.gamma1 * p.mu1 * p.eta2 + p.gamma2 * p.mu2 * p.eta1 - p.gamma1 * p.gamma2 * p.mu3;
  return d;
}

std::vector<AssumptionCheck> validate_standing_assumptions(const ModelParams& p,
                                                           const DerivedQuantities& d) {
  std::vector<AssumptionCheck> out;
  out.push_back({"sigma_ordering", d.sigma1 < d.sigma2 && d.sigma2 < d.sigma3, d.sigma2});
  out.push_back({"deltaAlpha_nonzero", d.deltaAlpha != 0.0, d.deltaAlpha});
  out.push_back({"gammastar_lt_1", d.gammastar < 1.0, d.gammastar});
  out.push_back({"gamma1_lt_deltaAlpha_over_alpha3", p.gamma1 * p.alpha3 < d.deltaAlpha,
                 d.deltaAlpha / p.alpha3});
  return out;
}

namespace {

const char* const kFields[] = {"r",      "K",      "alpha1", "alpha2", "alpha3", "eta1",
                               "eta2",   "gamma1", "gamma2", "mu1",    "mu2",    "mu3",
                               "rho1",   "rho2",   "rho3",   "mu4p"};

double& field_ref(ModelParams& p, const std::string& name) {
  if (name == "r") return p.r;
  if (name == "K") return p.K;
  if (name == "alpha1") return p.alpha1;
  if (name == "alpha2") return p.alpha2;
  if (name == "alpha3") return p.alpha3;
  if (name == "eta1") return p.eta1;
  if (name == "eta2") return p.eta2;
  if (name == "gamma1") return p.gamma1;
  if (name == "gamma2") return p.gamma2;
  if (name == "mu1") return p.mu1;
  if (name == "mu2") return p.mu2;
  if (name == "mu3") return p.mu3;
  if (name == "rho1") return p.rho1;
  if (name == "rho2") return p.rho2;
  if (name == "rho3") return p.rho3;
  if (name == "mu4p") return p.mu4p;
  throw ValidationError("unknown parameter field: " + name);
}

}  // namespace

ModelParams params_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("parameter file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("parameter file must be a JSON object");
  ModelParams p;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number()) {
      throw ValidationError("parameter field '" + it.key() + "' must be a number");
    }
    field_ref(p, it.key()) = it.value().get<double>();
  }
  for (const char* name : kFields) {
    if (!j.contains(name)) throw ValidationError(std::string("missing parameter field: ") + name);
  }
  p.validate();
  return p;
}

ModelParams params_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open parameter file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return params_from_json_text(ss.str());
}

std::string params_to_json(const ModelParams& p) {
  nlohmann::ordered_json j;
  const ModelParams& c = p;
  j["r"] = c.r;
  j["K"] = c.K;
  j["alpha1"] = c.alpha1;
  j["alpha2"] = c.alpha2;
  j["alpha3"] = c.alpha3;
  j["eta1"] = c.eta1;
  j["eta2"] = c.eta2;
  j["gamma1"] = c.gamma1;
  j["gamma2"] = c.gamma2;
  j["mu1"] = c.mu1;
  j["mu2"] = c.mu2;
  j["mu3"] = c.mu3;
  j["rho1"] = c.rho1;
  j["rho2"] = c.rho2;
  j["rho3"] = c.rho3;
  j["mu4p"] = c.mu4p;
  return j.dump();
}

}  // namespace coinfect
