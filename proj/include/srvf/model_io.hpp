#pragma once

#include <string>

#include "srvf/classify.hpp"
#include "srvf/manifold.hpp"

namespace srvf {
namespace model_io {

// Versioned JSON model files so fits persist across CLI invocations.

void save_karcher_mean(const manifold::KarcherMean& mean, const std::string& path);
manifold::KarcherMean load_karcher_mean(const std::string& path);

void save_classifier(const cls::TrainedClassifier& c, const std::string& path);
cls::TrainedClassifier load_classifier(const std::string& path);

}  // namespace model_io
}  // namespace srvf
