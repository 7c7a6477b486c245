#pragma once

#include <stdexcept>
#include <string>

namespace mlbm {

// Every library failure derives from Error so the CLI can map categories
// onto exit codes.
class Error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
	using Error::Error;
};

// Model or equivalence specification does not fit the network/partition.
class SpecError : public Error {
public:
	using Error::Error;
};

class FeasibilityError : public Error {
public:
	using Error::Error;
};

class CapacityError : public Error {
public:
	using Error::Error;
};

class DegenerateError : public Error {
public:
	using Error::Error;
};

class MembershipError : public Error {
public:
	using Error::Error;
};

class TieError : public Error {
public:
	using Error::Error;
};

class IoError : public Error {
public:
	using Error::Error;
};

} // namespace mlbm
