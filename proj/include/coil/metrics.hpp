#pragma once

#include "coil/errors.hpp"
#include "coil/io.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

namespace coil {

/// SNR(estimate, reference) = 20*log10(|ref| / |ref - estimate|) in dB.
/// Returns +inf for an exact match.
template <typename DerivedA, typename DerivedB>
double snr_db(const Eigen::MatrixBase<DerivedA>& estimate,
              const Eigen::MatrixBase<DerivedB>& reference) {
    if (estimate.rows() != reference.rows() || estimate.cols() != reference.cols())
        throw std::invalid_argument("snr_db: shapes must match");
    const double ref_norm = reference.template cast<double>().norm();
    if (ref_norm == 0.0) throw std::invalid_argument("snr_db: reference must not be all-zero");
    const double err_norm = (reference.template cast<double>() - estimate.template cast<double>()).norm();
    if (err_norm == 0.0) return std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(ref_norm / err_norm);
}

/// One row of the results table.
struct MetricRecord {
    std::string experiment_id;
    int num_views = 0;
    double input_snr_db = 0.0;
    std::string method;
    double alpha = 0.0;
    double snr_db = 0.0;
    double wall_time_s = 0.0;
};

inline constexpr const char* kMetricsCsvHeader =
    "experiment_id,num_views,input_snr_db,method,alpha,snr_db,wall_time_s";

inline std::string metrics_csv_row(const MetricRecord& r) {
    return r.experiment_id + "," + std::to_string(r.num_views) + "," +
           format_real(r.input_snr_db) + "," + r.method + "," + format_real(r.alpha) + "," +
           format_real(r.snr_db) + "," + format_real(r.wall_time_s);
}

/// Appends one CSV row, creating the file with its header first if needed.
/// The row is written in a single append so concurrent rows from different
/// records do not interleave.
inline void append_metrics_csv(const MetricRecord& record, const std::string& path) {
    bool fresh = false;
    {
        std::ifstream probe(path, std::ios::binary);
        fresh = !probe.good();
    }
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw io_error("cannot open metrics CSV for append: " + path);
    std::string chunk;
    if (fresh) chunk = std::string(kMetricsCsvHeader) + "\n";
    chunk += metrics_csv_row(record) + "\n";
    out.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
    out.flush();
    if (!out) throw io_error("append failed on metrics CSV: " + path);
}

} // namespace coil
