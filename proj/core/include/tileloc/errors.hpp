
/* errors.hpp */

#ifndef TILELOC_ERRORS_HPP
#define TILELOC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tileloc {

/* Malformed tile/mask/metadata file contents */
class FormatError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/* File system failure (unreadable file, unwritable directory) */
class IoError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/* Invalid configuration value or config file */
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/* Violated precondition of an operation */
class ContractError : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

} /* namespace tileloc */

#endif /* TILELOC_ERRORS_HPP */
