#pragma once

#include <stdexcept>
#include <string>

namespace bvq {

// Error categories map onto the CLI exit codes: config=2, data=3, numeric=4.
enum class ErrorKind { Config, Data, Numeric };

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }
    int exit_code() const {
        switch (kind_) {
            case ErrorKind::Config: return 2;
            case ErrorKind::Data: return 3;
            case ErrorKind::Numeric: return 4;
        }
        return 1;
    }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void config_error(const std::string& msg) { throw Error(ErrorKind::Config, msg); }
[[noreturn]] inline void data_error(const std::string& msg) { throw Error(ErrorKind::Data, msg); }
[[noreturn]] inline void numeric_error(const std::string& msg) { throw Error(ErrorKind::Numeric, msg); }

}  // namespace bvq
