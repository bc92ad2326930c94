#pragma once

#include <stdexcept>
#include <string>

namespace treedim {

// Exit-code taxonomy shared by the library and the CLI.
enum class errc : int {
    ok = 0,
    precondition = 2,   // hypothesis or precondition violated
    search_exhausted = 3,
    budget_exceeded = 4,
    io = 5,
};

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    errc code() const { return code_; }

private:
    errc code_;
};

struct precondition_error : error {
    explicit precondition_error(const std::string& what) : error(errc::precondition, what) {}
};

struct search_exhausted_error : error {
    explicit search_exhausted_error(const std::string& what) : error(errc::search_exhausted, what) {}
};

struct budget_error : error {
    explicit budget_error(const std::string& what) : error(errc::budget_exceeded, what) {}
};

struct io_error : error {
    explicit io_error(const std::string& what) : error(errc::io, what) {}
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw precondition_error(what);
}

} // namespace treedim
