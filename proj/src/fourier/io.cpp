#include "cxeuler/fourier.hpp"

#include <json.hpp>

#include <iomanip>
#include <ostream>

namespace cxeuler::fourier {

using nlohmann::json;

std::string to_json(const FourierField& f) {
  json modes = json::array();
  for (std::size_t i = 0; i < f.mode_count(); ++i) {
    if (f.magnitude(i) == 0.0) continue;
    const Wavevector k = f.wavevector(i);
    json entry;
    entry["k"] = f.dim() == 1 ? json::array({k.x}) : json::array({k.x, k.y});
    json re = json::array();
    json im = json::array();
    for (const auto& c : f.mode(i)) {
      re.push_back(c.real());
      im.push_back(c.imag());
    }
    entry["re"] = std::move(re);
    entry["im"] = std::move(im);
    modes.push_back(std::move(entry));
  }
  json doc;
  doc["dim"] = f.dim();
  doc["K"] = f.cutoff();
  doc["components"] = f.components();
  doc["modes"] = std::move(modes);
  return doc.dump();
}

FourierField from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FieldError(std::string("from_json: ") + e.what());
  }
  if (!doc.contains("dim") || !doc.contains("K") || !doc.contains("modes"))
    throw FieldError("from_json: expected keys dim, K, modes");
  const int dim = doc.at("dim").get<int>();
  const int cutoff = doc.at("K").get<int>();
  const auto& modes = doc.at("modes");
  int components = doc.value("components", 0);
  if (components == 0) components = modes.empty() ? 1 : static_cast<int>(modes.front().at("re").size());

  FourierField f(dim, cutoff, components);
  for (const auto& entry : modes) {
    const auto& kk = entry.at("k");
    if (static_cast<int>(kk.size()) != dim) throw FieldError("from_json: wavevector length != dim");
    const Wavevector k{kk.at(0).get<int>(), dim == 2 ? kk.at(1).get<int>() : 0};
    if (!f.contains(k)) throw FieldError("from_json: wavevector outside cutoff");
    const auto& re = entry.at("re");
    const auto& im = entry.at("im");
    if (static_cast<int>(re.size()) != components || static_cast<int>(im.size()) != components)
      throw FieldError("from_json: coefficient length != components");
    auto c = f.coeffs(k);
    for (int j = 0; j < components; ++j)
      c[static_cast<std::size_t>(j)] = Complex{re.at(static_cast<std::size_t>(j)).get<double>(),
                                               im.at(static_cast<std::size_t>(j)).get<double>()};
  }
  return f;
}

void write_decay_csv(std::ostream& os, const FourierField& f) {
  os << (f.dim() == 1 ? "k,abs\n" : "kx,ky,abs\n");
  os << std::setprecision(17);
  for (std::size_t i = 0; i < f.mode_count(); ++i) {
    const Wavevector k = f.wavevector(i);
    if (f.dim() == 1)
      os << k.x << ',' << f.magnitude(i) << '\n';
    else
      os << k.x << ',' << k.y << ',' << f.magnitude(i) << '\n';
  }
}

}  // namespace cxeuler::fourier
