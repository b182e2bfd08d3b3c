#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sbcg/io.hpp"
#include "sbcg/problems/dictionary.hpp"
#include "sbcg/problems/regression.hpp"

namespace sbcg::bench {

namespace fs = std::filesystem;

inline std::vector<std::string> regression_header(Index d) {
  std::vector<std::string> h;
  for (Index j = 0; j < d; ++j) h.push_back("x" + std::to_string(j + 1));
  h.emplace_back("y");
  return h;
}

/// train.csv, val.csv, test.csv: features then the response.
inline std::vector<fs::path> write_regression_data(const fs::path& dir, const RegressionProblem& rp) {
  fs::create_directories(dir);
  const auto header = regression_header(rp.A_tr.cols());
  std::vector<fs::path> out{dir / "train.csv", dir / "val.csv", dir / "test.csv"};
  write_numeric_csv(out[0].string(), regression_split_table(rp.A_tr, rp.b_tr), header);
  write_numeric_csv(out[1].string(), regression_split_table(rp.A_val, rp.b_val), header);
  write_numeric_csv(out[2].string(), regression_split_table(rp.A_test, rp.b_test), header);
  return out;
}

inline RegressionProblem load_regression_data(const fs::path& dir, double lambda) {
  RegressionProblem rp;
  rp.lambda = lambda;
  auto load = [&](const char* name, Matrix& A, Vector& b) {
    const NumericTable t = read_numeric_csv((dir / name).string());
    if (t.data.cols() < 2) throw IngestionError(std::string(name) + " needs features and a response", 1, 0);
    A = t.data.leftCols(t.data.cols() - 1);
    b = t.data.col(t.data.cols() - 1);
  };
  load("train.csv", rp.A_tr, rp.b_tr);
  load("val.csv", rp.A_val, rp.b_val);
  load("test.csv", rp.A_test, rp.b_test);
  rp.validate();
  return rp;
}

/// dims.csv, D_true.csv, A.csv, A_new.csv and atoms.csv (membership of each
/// true atom in the old and new sub-dictionaries).
inline std::vector<fs::path> write_dictionary_data(const fs::path& dir, const DictionaryProblem& pr) {
  fs::create_directories(dir);
  const DictionaryDims& d = pr.dims;
  std::vector<fs::path> out{dir / "dims.csv", dir / "D_true.csv", dir / "A.csv", dir / "A_new.csv",
                            dir / "atoms.csv"};
  Matrix dims(1, 9);
  dims << static_cast<double>(d.m), static_cast<double>(d.q), static_cast<double>(d.p),
      static_cast<double>(d.p_new), static_cast<double>(d.n), static_cast<double>(d.n_new),
      static_cast<double>(d.nnz), d.delta, d.noise;
  write_numeric_csv(out[0].string(), dims, {"m", "q", "p", "p_new", "n", "n_new", "nnz", "delta", "noise"});
  write_numeric_csv(out[1].string(), pr.D_true);
  write_numeric_csv(out[2].string(), pr.A);
  write_numeric_csv(out[3].string(), pr.A_new);
  Matrix atoms = Matrix::Zero(d.q, 3);
  for (Index j = 0; j < d.q; ++j) atoms(j, 0) = static_cast<double>(j);
  for (Index j : pr.old_atoms) atoms(j, 1) = 1.0;
  for (Index j : pr.new_atoms) atoms(j, 2) = 1.0;
  write_numeric_csv(out[4].string(), atoms, {"atom", "old", "new"});
  return out;
}

inline DictionaryProblem load_dictionary_data(const fs::path& dir) {
  const Matrix dims = read_numeric_csv((dir / "dims.csv").string()).data;
  if (dims.rows() != 1 || dims.cols() != 9) throw IngestionError("dims.csv must hold one row of 9 values", 2, 0);
  DictionaryProblem pr;
  DictionaryDims& d = pr.dims;
  d.m = static_cast<Index>(dims(0, 0));
  d.q = static_cast<Index>(dims(0, 1));
  d.p = static_cast<Index>(dims(0, 2));
  d.p_new = static_cast<Index>(dims(0, 3));
  d.n = static_cast<Index>(dims(0, 4));
  d.n_new = static_cast<Index>(dims(0, 5));
  d.nnz = static_cast<Index>(dims(0, 6));
  d.delta = dims(0, 7);
  d.noise = dims(0, 8);
  d.validate();
  pr.D_true = read_numeric_csv((dir / "D_true.csv").string()).data;
  pr.A = read_numeric_csv((dir / "A.csv").string()).data;
  pr.A_new = read_numeric_csv((dir / "A_new.csv").string()).data;
  const Matrix atoms = read_numeric_csv((dir / "atoms.csv").string()).data;
  if (pr.D_true.rows() != d.m || pr.D_true.cols() != d.q || pr.A.rows() != d.m || pr.A.cols() != d.n ||
      pr.A_new.rows() != d.m || pr.A_new.cols() != d.n_new || atoms.rows() != d.q || atoms.cols() != 3) {
    throw IngestionError("dictionary files disagree with dims.csv", 0, 0);
  }
  for (Index j = 0; j < d.q; ++j) {
    if (atoms(j, 1) != 0.0) pr.old_atoms.push_back(j);
    if (atoms(j, 2) != 0.0) pr.new_atoms.push_back(j);
  }
  if (static_cast<Index>(pr.old_atoms.size()) != d.p || static_cast<Index>(pr.new_atoms.size()) != d.p_new) {
    throw IngestionError("atoms.csv disagrees with dims.csv", 0, 0);
  }
  return pr;
}

}  // namespace sbcg::bench
