#pragma once

#include <stdexcept>
#include <string>

namespace cvf {

/// Pipeline error tagged with the stage that raised it.
class StagedError : public std::runtime_error {
public:
    StagedError(std::string stage, const std::string& what)
        : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}

    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

}  // namespace cvf
