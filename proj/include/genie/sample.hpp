#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace genie {

enum class Provenance { real, genie, img2img, condsample, traditional, cutmix, mixup };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::real: return "real";
    case Provenance::genie: return "genie";
    case Provenance::img2img: return "img2img";
    case Provenance::condsample: return "condsample";
    case Provenance::traditional: return "traditional";
    case Provenance::cutmix: return "cutmix";
    case Provenance::mixup: return "mixup";
  }
  return "real";
}

inline Provenance provenance_from_string(std::string_view s) {
  if (s == "real" || s == "none") return Provenance::real;
  if (s == "genie") return Provenance::genie;
  if (s == "img2img") return Provenance::img2img;
  if (s == "condsample") return Provenance::condsample;
  if (s == "traditional") return Provenance::traditional;
  if (s == "cutmix") return Provenance::cutmix;
  if (s == "mixup") return Provenance::mixup;
  throw std::invalid_argument("unknown provenance: " + std::string(s));
}

struct LabeledSample {
  std::vector<double> x;
  int y = 0;
  Provenance provenance = Provenance::real;
  std::optional<int> source_class;
  std::optional<double> r_used;
};

}  // namespace genie
