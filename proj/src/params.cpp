#include "pirdfl/params.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pirdfl {

void TrainConfig::validate() const {
  if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0))
    throw std::invalid_argument("betas must be in (0,1)");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (batch_size < 1 || max_epochs < 1)
    throw std::invalid_argument("batch_size and max_epochs must be >= 1");
  if (!(learning_rate > 0.0) || !(epsilon > 0.0))
    throw std::invalid_argument("learning_rate and epsilon must be > 0");
}

int ModelParams::add(std::string name, std::vector<int> shape) {
  names_.push_back(std::move(name));
  values_.emplace_back(shape);
  grads_.emplace_back(shape);
  adam_m_.emplace_back(shape);
  adam_v_.emplace_back(shape);
  return static_cast<int>(values_.size()) - 1;
}

int ModelParams::find(const std::string& name) const {
  for (int i = 0; i < count(); ++i)
    if (names_[i] == name) return i;
  throw std::invalid_argument("unknown parameter " + name);
}

long ModelParams::total_size() const {
  long n = 0;
  for (const auto& t : values_) n += t.size();
  return n;
}

void ModelParams::zero_grads() {
  for (auto& g : grads_) g.fill(0.0);
}

void ModelParams::add_grads_from(const ModelParams& other, double scale) {
  for (int i = 0; i < count(); ++i) {
    const auto& src = other.grads_[i].v;
    auto& dst = grads_[i].v;
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += scale * src[j];
  }
}

void ModelParams::set_grads(const std::vector<Tensor>& src, double scale) {
  if (src.size() != grads_.size())
    throw std::invalid_argument("gradient buffer count mismatch");
  for (std::size_t i = 0; i < grads_.size(); ++i)
    for (std::size_t j = 0; j < grads_[i].v.size(); ++j)
      grads_[i].v[j] = scale * src[i].v[j];
}

void ModelParams::check_finite_grads() const {
  for (int i = 0; i < count(); ++i)
    for (double g : grads_[i].v)
      if (!std::isfinite(g))
        throw std::runtime_error("non-finite gradient in parameter " + names_[i]);
}

void ModelParams::adam_step(const TrainConfig& cfg) {
  ++step_;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_));
  for (int i = 0; i < count(); ++i) {
    auto& val = values_[i].v;
    const auto& g = grads_[i].v;
    auto& m = adam_m_[i].v;
    auto& v = adam_v_[i].v;
    const double decay =
        values_[i].shape.size() == 2 ? cfg.learning_rate * cfg.weight_decay : 0.0;
    for (std::size_t j = 0; j < val.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double mh = m[j] / c1;
      const double vh = v[j] / c2;
      val[j] -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.epsilon) + decay * val[j];
    }
  }
}

void ModelParams::reset_optimizer() {
  step_ = 0;
  for (auto& t : adam_m_) t.fill(0.0);
  for (auto& t : adam_v_) t.fill(0.0);
}

void ModelParams::restore_values(const std::vector<Tensor>& snap) {
  if (snap.size() != values_.size())
    throw std::invalid_argument("snapshot does not match parameter registry");
  values_ = snap;
}

void ModelParams::save(std::ostream& os, const std::string& model_name) const {
  os << "pirdfl-checkpoint v1\n";
  os << "model " << model_name << "\n";
  os << "params " << count() << "\n";
  char buf[32];
  for (int i = 0; i < count(); ++i) {
    const Tensor& t = values_[i];
    os << "param " << names_[i] << " " << t.shape.size();
    for (int d : t.shape) os << " " << d;
    os << "\n";
    for (long j = 0; j < t.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", t.v[j]);
      os << buf << ((j + 1) % 8 == 0 || j + 1 == t.size() ? '\n' : ' ');
    }
  }
}

void ModelParams::load(std::istream& is, ModelParams& params,
                       std::string* model_name) {
  std::string magic, version;
  is >> magic >> version;
  if (magic != "pirdfl-checkpoint" || version != "v1")
    throw std::runtime_error("not a pirdfl checkpoint");
  std::string key, name;
  is >> key >> name;
  if (key != "model") throw std::runtime_error("malformed checkpoint");
  if (model_name) *model_name = name;
  int n = 0;
  is >> key >> n;
  if (key != "params") throw std::runtime_error("malformed checkpoint");
  if (n != params.count())
    throw std::runtime_error("checkpoint parameter count mismatch");
  for (int i = 0; i < n; ++i) {
    std::string pname;
    int ndims = 0;
    is >> key >> pname >> ndims;
    if (key != "param" || pname != params.names_[i])
      throw std::runtime_error("checkpoint parameter order mismatch at " + pname);
    std::vector<int> shape(ndims);
    for (int& d : shape) is >> d;
    if (shape != params.values_[i].shape)
      throw std::runtime_error("checkpoint shape mismatch at " + pname);
    for (long j = 0; j < params.values_[i].size(); ++j) is >> params.values_[i].v[j];
  }
  if (!is) throw std::runtime_error("truncated checkpoint");
}

void ModelParams::save_file(const std::string& path,
                            const std::string& model_name) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  save(os, model_name);
}

std::string ModelParams::load_file(const std::string& path, ModelParams& params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::string name;
  load(is, params, &name);
  return name;
}

}  // namespace pirdfl
