#ifndef CFIO_ERRORS_HPP
#define CFIO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cfio {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// rank of J_mu below the generic rank
class RankDrop : public Error {
public:
    using Error::Error;
};

// first-layer frequency vanishes, H is not smooth there
class ZeroFrequency : public Error {
public:
    using Error::Error;
};

class OutsideOmega : public Error {
public:
    using Error::Error;
};

class NearCharacteristic : public Error {
public:
    using Error::Error;
};

class ZeroTime : public Error {
public:
    using Error::Error;
};

class RefineFailure : public Error {
public:
    using Error::Error;
};

// malformed user input (group files, CLI parameters)
class InputError : public Error {
public:
    using Error::Error;
};

} // namespace cfio

#endif
