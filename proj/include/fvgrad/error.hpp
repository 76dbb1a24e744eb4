#pragma once

#include <stdexcept>
#include <string>

namespace fvgrad {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class InvalidDomainError : public Error { public: using Error::Error; };
class DegenerateInputError : public Error { public: using Error::Error; };
class DimensionError : public Error { public: using Error::Error; };
class EvaluationError : public Error { public: using Error::Error; };
class CoercivityError : public Error { public: using Error::Error; };
class SpecError : public Error { public: using Error::Error; };
class SingularMatrixError : public Error { public: using Error::Error; };

// Carries the offending cell when the failure is local to one control volume.
class InadmissibleMeshError : public Error
{
public:
    InadmissibleMeshError(const std::string& what, long cell = -1)
        : Error(what), _cell(cell)
    {}
    long cell() const { return _cell; }

private:
    long _cell;
};

class ParseError : public Error
{
public:
    ParseError(const std::string& what, long line = -1, std::string field = {})
        : Error(what), _line(line), _field(std::move(field))
    {}
    long line() const { return _line; }
    const std::string& field() const { return _field; }

private:
    long _line;
    std::string _field;
};

} // namespace fvgrad
