#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "llpd/spectral.hpp"
#include "llpd/theory_bounds.hpp"

namespace llpd {

inline constexpr int kReportSchemaVersion = 1;

inline nlohmann::json report_to_json(const ClusterReport& rep,
                                     const nlohmann::json& params) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["params"] = params;
  j["n"] = rep.n;
  j["N"] = rep.N;
  j["theta"] = rep.theta;
  j["K_hat"] = rep.K_hat;
  j["sigma_hat"] = rep.sigma_hat;
  j["eigengap"] = rep.eigengap;
  j["lambda2_at_sigma_hat"] = rep.lambda2_at_sigma_hat;
  j["embedding_zero_rows"] = rep.embedding_zero_rows;
  if (rep.accuracy) {
    j["oa"] = rep.accuracy->oa;
    j["aa"] = rep.accuracy->aa;
    j["kappa"] = rep.accuracy->kappa;
  }
  nlohmann::json t;
  for (const auto& [k, v] : rep.timings_ms) t[k] = v;
  j["timings_ms"] = t;
  return j;
}

inline void write_json_atomic(const nlohmann::json& j,
                              const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out << j.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

// Rows (sigma, lambda_1 .. lambda_kmax).
inline void save_eigencurves_csv(const std::vector<double>& sigmas,
                                 const Eigen::MatrixXd& eigenvalues,
                                 const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out.precision(17);
    out << "sigma";
    for (int c = 0; c < eigenvalues.cols(); ++c) out << ",lambda_" << (c + 1);
    out << "\n";
    for (std::size_t r = 0; r < sigmas.size(); ++r) {
      out << sigmas[r];
      for (int c = 0; c < eigenvalues.cols(); ++c)
        out << ',' << eigenvalues(static_cast<int>(r), c);
      out << "\n";
    }
  }
  std::filesystem::rename(tmp, path);
}

// Denoise report: {theta, kNoise, n, N, removed_indices}.
inline void save_denoise_json(const DenoiseReport& rep, int n,
                              const std::string& path) {
  nlohmann::json j;
  j["theta"] = rep.theta;
  j["kNoise"] = rep.k_noise;
  j["n"] = n;
  j["N"] = static_cast<int>(rep.kept.size());
  j["removed_indices"] = rep.removed;
  write_json_atomic(j, path);
}

}  // namespace llpd
