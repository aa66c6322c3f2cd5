#ifndef SUBPIX_ERRORS_HPP
#define SUBPIX_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace subpix {

/// Malformed input file. `offset` is the byte position where parsing failed.
class FormatError : public std::runtime_error {
public:
    FormatError(std::string const& msg, std::size_t offset = 0) :
        std::runtime_error(msg + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset)
    {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

} // namespace subpix

#endif
