#include "diffuvolume/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace diffuvolume {
namespace {

// Shared validation; returns the number of masked pixels.
long long check(const DisparityMap& pred, const DisparityMap& gt,
                std::span<const std::uint8_t> mask, const char* op) {
  if (pred.width != gt.width || pred.height != gt.height) {
    throw std::invalid_argument(std::string(op) + ": prediction and ground truth differ in shape");
  }
  if (mask.size() != gt.size()) throw std::invalid_argument(std::string(op) + ": mask size mismatch");
  long long n = 0;
  for (auto m : mask) n += m != 0;
  if (n == 0) throw std::invalid_argument(std::string(op) + ": empty evaluation mask");
  return n;
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::vector<std::uint8_t> evaluation_mask(const DisparityMap& gt,
                                          std::span<const std::uint8_t> extra) {
  if (!extra.empty() && extra.size() != gt.size()) {
    throw std::invalid_argument("evaluation_mask: extra mask size mismatch");
  }
  std::vector<std::uint8_t> out(gt.mask);
  if (!extra.empty()) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] && extra[i];
  }
  return out;
}

double epe(const DisparityMap& pred, const DisparityMap& gt, std::span<const std::uint8_t> mask) {
  const long long n = check(pred, gt, mask, "epe");
  double sum = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) sum += std::abs(pred.values[i] - gt.values[i]);
  }
  return sum / static_cast<double>(n);
}

double bad_p(const DisparityMap& pred, const DisparityMap& gt, double threshold,
             std::span<const std::uint8_t> mask) {
  if (!(threshold > 0.0)) throw std::invalid_argument("bad_p: threshold must be positive");
  const long long n = check(pred, gt, mask, "bad_p");
  long long bad = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] && std::abs(pred.values[i] - gt.values[i]) > threshold) ++bad;
  }
  return 100.0 * static_cast<double>(bad) / static_cast<double>(n);
}

double d1(const DisparityMap& pred, const DisparityMap& gt, std::span<const std::uint8_t> mask) {
  const long long n = check(pred, gt, mask, "d1");
  long long bad = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const double err = std::abs(pred.values[i] - gt.values[i]);
    if (err > 3.0 && err > 0.05 * std::abs(gt.values[i])) ++bad;
  }
  return 100.0 * static_cast<double>(bad) / static_cast<double>(n);
}

double weighted_l1_loss(std::span<const DisparityMap> preds, const DisparityMap& gt,
                        std::span<const double> lambdas, std::span<const std::uint8_t> mask) {
  if (preds.size() != lambdas.size()) {
    throw std::invalid_argument("weighted_l1_loss: one weight per prediction required");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) loss += lambdas[i] * epe(preds[i], gt, mask);
  return loss;
}

std::string MetricReport::to_key_value() const {
  std::string out;
  out += "epe=" + fixed(epe) + "\n";
  out += "bad_1=" + fixed(bad_1) + "\n";
  out += "bad_2=" + fixed(bad_2) + "\n";
  out += "bad_3=" + fixed(bad_3) + "\n";
  out += "d1_all=" + fixed(d1_all) + "\n";
  out += "pixels=" + std::to_string(pixels) + "\n";
  return out;
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["epe"] = epe;
  j["bad_1"] = bad_1;
  j["bad_2"] = bad_2;
  j["bad_3"] = bad_3;
  j["d1_all"] = d1_all;
  j["pixels"] = pixels;
  return j.dump(2);
}

MetricReport MetricReport::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  MetricReport r;
  r.epe = j.at("epe").get<double>();
  r.bad_1 = j.at("bad_1").get<double>();
  r.bad_2 = j.at("bad_2").get<double>();
  r.bad_3 = j.at("bad_3").get<double>();
  r.d1_all = j.at("d1_all").get<double>();
  r.pixels = j.at("pixels").get<long long>();
  return r;
}

MetricReport evaluate(const DisparityMap& pred, const DisparityMap& gt,
                      std::span<const std::uint8_t> mask) {
  MetricReport r;
  r.pixels = check(pred, gt, mask, "evaluate");
  r.epe = epe(pred, gt, mask);
  r.bad_1 = bad_p(pred, gt, 1.0, mask);
  r.bad_2 = bad_p(pred, gt, 2.0, mask);
  r.bad_3 = bad_p(pred, gt, 3.0, mask);
  r.d1_all = d1(pred, gt, mask);
  return r;
}

}  // namespace diffuvolume
