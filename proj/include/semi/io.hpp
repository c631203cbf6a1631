#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "semi/util.hpp"

#include <json.hpp>

namespace semi {

/* Dump formats for cross-checking operators and vectors between
   implementations.

   JSON: {"kind": "operator"|"vector", "rows": r, "cols": c,
          "hermitian": bool, "entries": [re, im, re, im, ...]}  (row-major)

   Binary: magic "SEMIOP01"/"SEMIVC01", two little-endian int64 (rows, cols),
   then rows*cols little-endian double pairs (re, im), row-major. */
void dump_operator_json(const Eigen::MatrixXcd& A, const std::string& path,
                        bool hermitian_hint = false);
Eigen::MatrixXcd load_operator_json(const std::string& path);
void dump_operator_binary(const Eigen::MatrixXcd& A, const std::string& path);
Eigen::MatrixXcd load_operator_binary(const std::string& path);
void dump_vector_json(const Eigen::VectorXcd& v, const std::string& path);
Eigen::VectorXcd load_vector_json(const std::string& path);

// Whole-file atomic write (temp file + rename), so failures leave no
// partial artifacts behind.
void write_text_atomic(const std::string& path, const std::string& content);

/* CSV accumulated in memory and written atomically: '.' decimal, ','
   separator, mandatory header, every float at 17 significant digits. */
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    void add_row(const std::vector<double>& values);
    void add_row_mixed(const std::vector<std::string>& values);
    std::string render() const;
    void write(const std::string& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// FNV-1a of the canonical (sorted-key) JSON dump.
std::string config_hash(const nlohmann::json& config);

// Sampled phase-space field as CSV: one row per node,
// columns z0_re, z0_im, ..., f.
void write_field_csv(const std::string& path, const Eigen::MatrixXcd& nodes,
                     const Eigen::VectorXd& values);

} // namespace semi
