// Copyright 2026 The wcrisk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wcrisk/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "wcrisk/dataset.hpp"
#include "wcrisk/error.hpp"
#include "wcrisk/oracles.hpp"

namespace wcrisk {
namespace {

std::optional<double> pearson(const std::vector<double>& a,
                              const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  if (a.size() < 2) return std::nullopt;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::string opt(const std::optional<double>& v) {
  return v ? format_double(*v) : "";
}

}  // namespace

double wasserstein1(std::span<const double> sub, std::span<const double> full) {
  if (sub.empty() || full.empty()) throw EmptySubsample("W1 of an empty sample");
  std::vector<double> a(sub.begin(), sub.end());
  std::vector<double> b(full.begin(), full.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  // Integrate |F_a - F_b| over the merged breakpoints.
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double x = std::min(a.front(), b.front());
  double total = 0.0;
  while (i < a.size() || j < b.size()) {
    double next;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) {
      next = a[i];
    } else {
      next = b[j];
    }
    total += std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb) *
             (next - x);
    x = next;
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
  }
  return total;
}

SubsampleReport characterize_subsample(const EvaluationFrame& frame,
                                       std::span<const std::uint8_t> h,
                                       std::optional<std::span<const double>> outcome,
                                       double alpha) {
  const std::size_t n = frame.n();
  if (h.size() != n) throw DimensionMismatch("indicator length does not match the frame");
  if (outcome && outcome->size() != n) {
    throw DimensionMismatch("outcome length does not match the frame");
  }
  SubsampleReport report;
  report.alpha = alpha;
  for (std::uint8_t v : h) report.subsample_size += v ? 1 : 0;
  if (report.subsample_size == 0) throw EmptySubsample("no row is in the subsample");
  const std::size_t outside_n = n - report.subsample_size;

  for (Eigen::Index c = 0; c < frame.w.values.cols(); ++c) {
    double in_sum = 0.0, out_sum = 0.0;
    std::vector<double> col_in, out_in;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = frame.w.values(static_cast<Eigen::Index>(i), c);
      if (h[i]) {
        in_sum += v;
        if (outcome) {
          col_in.push_back(v);
          out_in.push_back((*outcome)[i]);
        }
      } else {
        out_sum += v;
      }
    }
    MutableRate rate;
    rate.column = frame.w.column_names[static_cast<std::size_t>(c)];
    rate.inside = in_sum / static_cast<double>(report.subsample_size);
    if (outside_n > 0) rate.outside = out_sum / static_cast<double>(outside_n);
    report.mutable_rates.push_back(rate);
    if (outcome) report.correlations.push_back({rate.column, pearson(col_in, out_in)});
  }

  for (const SourceEncoding& src : frame.z.sources) {
    MarginalDistance d;
    d.column = src.name;
    if (src.type == ColumnType::kNumeric) {
      d.metric = "wasserstein1";
      std::vector<double> full, sub;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = frame.z.values(static_cast<Eigen::Index>(i),
                                        static_cast<Eigen::Index>(src.first));
        full.push_back(v);
        if (h[i]) sub.push_back(v);
      }
      d.distance = wasserstein1(sub, full);
    } else {
      d.metric = "total_variation";
      double tv = 0.0;
      for (std::size_t k = 0; k < src.width; ++k) {
        const auto col = static_cast<Eigen::Index>(src.first + k);
        double all = 0.0, in = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double v = frame.z.values(static_cast<Eigen::Index>(i), col);
          all += v;
          if (h[i]) in += v;
        }
        tv += std::fabs(in / static_cast<double>(report.subsample_size) -
                        all / static_cast<double>(n));
      }
      d.distance = 0.5 * tv;
    }
    report.immutable_distances.push_back(d);
  }
  return report;
}

double compare_on_subsample(std::span<const std::uint8_t> h,
                            std::span<const double> alternative) {
  if (h.size() != alternative.size()) {
    throw DimensionMismatch("comparison column length does not match the indicators");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!h[i]) continue;
    if (!std::isfinite(alternative[i])) {
      throw DomainError("comparison column has a non-finite value");
    }
    sum += alternative[i];
    ++count;
  }
  if (count == 0) throw EmptySubsample("no row is in the subsample");
  return sum / static_cast<double>(count);
}

void emit_plot_data(const RiskCurve& curve, const std::filesystem::path& dir) {
  if (curve.points.empty()) throw ConfigError("cannot emit an empty curve");
  std::vector<const CurvePoint*> order;
  for (const CurvePoint& p : curve.points) order.push_back(&p);
  std::stable_sort(order.begin(), order.end(), [](const CurvePoint* a, const CurvePoint* b) {
    return a->estimate.alpha < b->estimate.alpha;
  });

  std::ofstream risk = open_csv(dir / "risk_curve.csv");
  risk << "alpha,rho,r_hat,ci_lo,ci_hi,sigma2,subsample_size\n";
  std::ofstream rates = open_csv(dir / "mutable_rates.csv");
  rates << "alpha,column,inside,outside\n";
  std::ofstream corr = open_csv(dir / "correlations.csv");
  corr << "alpha,column,correlation\n";
  std::ofstream dist = open_csv(dir / "immutable_distances.csv");
  dist << "alpha,column,metric,distance\n";
  for (const CurvePoint* p : order) {
    const WorstCaseEstimate& e = p->estimate;
    const std::string a = format_double(e.alpha);
    risk << a << ',' << format_double(rho_from_alpha(e.alpha)) << ','
         << format_double(e.r_hat) << ',' << format_double(e.ci_lower) << ','
         << format_double(e.ci_upper) << ',' << format_double(e.sigma2_hat) << ','
         << e.subsample_size() << '\n';
    if (!p->report) continue;
    for (const MutableRate& r : p->report->mutable_rates) {
      rates << a << ',' << r.column << ',' << format_double(r.inside) << ','
            << opt(r.outside) << '\n';
    }
    for (const Correlation& c : p->report->correlations) {
      corr << a << ',' << c.column << ',' << opt(c.value) << '\n';
    }
    for (const MarginalDistance& d : p->report->immutable_distances) {
      dist << a << ',' << d.column << ',' << d.metric << ','
           << format_double(d.distance) << '\n';
    }
  }
  for (std::ofstream* f : {&risk, &rates, &corr, &dist}) {
    f->flush();
    if (!*f) throw IoError("failed writing plot data in " + dir.string());
  }
}

}  // namespace wcrisk
