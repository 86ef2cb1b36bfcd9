#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace dmaps {

/// Receives non-fatal warnings. The default sink writes "warning: <msg>" to
/// stderr; set_warning_sink(nullptr) restores it.
using WarningSink = std::function<void(std::string_view)>;

void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

/// While alive, collects the warnings raised on the constructing thread
/// instead of passing them to the sink. Captures nest.
class WarningCapture {
 public:
  WarningCapture();
  ~WarningCapture();
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

  void record(std::string_view message) { messages_.emplace_back(message); }
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  std::vector<std::string> messages_;
  WarningCapture* previous_;
};

}  // namespace dmaps
