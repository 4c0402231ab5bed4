#pragma once

#include "rocs/core.hpp"
#include "rocs/dataset.hpp"

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace rocs::test {

namespace fs = std::filesystem;

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("rocs_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                                         std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline dataset::ObservationRecord record(const std::string& cls, const std::string& inst, int rep, double fl,
                                         double ri, std::optional<double> ro, double sl, double sw, double sh,
                                         double he, double ho) {
  dataset::ObservationRecord r;
  r.class_label = cls;
  r.instance_id = inst;
  r.repetition = rep;
  r.flatness = fl;
  r.rigidity = ri;
  r.roughness = ro;
  r.size_length = sl;
  r.size_width = sw;
  r.size_height = sh;
  r.heaviness = he;
  r.hollowness = ho;
  return r;
}

// Random but valid dataset: `classes` x `instances` x `reps`.
inline std::vector<dataset::ObservationRecord> random_records(std::uint64_t seed, int classes, int instances,
                                                              int reps) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<dataset::ObservationRecord> out;
  for (int c = 0; c < classes; ++c)
    for (int i = 0; i < instances; ++i) {
      double base[7];
      for (double& b : base) b = u(rng);
      double grams = std::floor(u(rng) * 900.0) + 10.0;
      for (int r = 1; r <= reps; ++r) {
        auto j = [&](double b) { return clamp01(b + (u(rng) - 0.5) * 0.02); };
        out.push_back(record("class" + std::to_string(c), "i" + std::to_string(i), r, j(base[0]), j(base[1]),
                             j(base[2]), j(base[3]), j(base[4]), j(base[5]), grams + std::floor(u(rng) * 3.0),
                             j(base[6])));
      }
    }
  return out;
}

}  // namespace rocs::test
