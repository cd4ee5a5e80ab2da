#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sysgraph {

struct SourceSpan {
  std::size_t line = 0;  // 1-based; 0 means "no source position"
  std::size_t column = 0;
  std::size_t length = 0;

  bool valid() const { return line != 0; }
};

enum class Severity { error, warning };

struct Diagnostic {
  Severity severity = Severity::error;
  SourceSpan span;
  std::string code;
  std::string message;

  // `path:line:col: severity[code]: message`
  std::string format(const std::string& path) const;
};

bool has_errors(const std::vector<Diagnostic>& diags);

// Thrown by operations that reject a model with one or more diagnostics.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(std::vector<Diagnostic> diags);
  ModelError(std::string code, std::string message);

  const std::vector<Diagnostic>& diagnostics() const { return diags_; }
  const std::string& code() const { return diags_.front().code; }

 private:
  std::vector<Diagnostic> diags_;
};

}  // namespace sysgraph
