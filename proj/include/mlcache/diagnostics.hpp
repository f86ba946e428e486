#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace mlcache {

// Non-fatal diagnostics. The default sink prints "warning: ..." to stderr.
using WarningSink = std::function<void(std::string_view)>;

void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

// Redirects warnings into a vector for the lifetime of the object.
class ScopedWarningCapture {
public:
  ScopedWarningCapture();
  ~ScopedWarningCapture();
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(std::string_view needle) const;

private:
  std::vector<std::string> messages_;
  WarningSink previous_;
};

}  // namespace mlcache
