#include "sysgraph/diagnostics.hpp"

#include <algorithm>

namespace sysgraph {

std::string Diagnostic::format(const std::string& path) const {
  std::string out = path;
  if (span.valid()) out += ":" + std::to_string(span.line) + ":" + std::to_string(span.column);
  out += severity == Severity::error ? ": error[" : ": warning[";
  out += code + "]: " + message;
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

namespace {

std::string summarize(const std::vector<Diagnostic>& diags) {
  if (diags.empty()) return "model error";
  std::string s = diags.front().code + ": " + diags.front().message;
  if (diags.size() > 1) s += " (+" + std::to_string(diags.size() - 1) + " more)";
  return s;
}

}  // namespace

ModelError::ModelError(std::vector<Diagnostic> diags)
    : std::runtime_error(summarize(diags)), diags_(std::move(diags)) {
  if (diags_.empty()) diags_.push_back({Severity::error, {}, "error", "model error"});
}

ModelError::ModelError(std::string code, std::string message)
    : ModelError(std::vector<Diagnostic>{{Severity::error, {}, std::move(code), std::move(message)}}) {}

}  // namespace sysgraph
