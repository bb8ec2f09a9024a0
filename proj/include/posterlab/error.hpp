#pragma once

#include <stdexcept>
#include <string>

namespace posterlab {

// One exception type for everything that can go wrong with user input:
// files, formats, configuration. Programming errors use std::logic_error.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace posterlab
