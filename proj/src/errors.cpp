#include "dictrnn/errors.hpp"

#include <sstream>

namespace dictrnn {

namespace {

std::string escape_message(std::string const& map, long step, double value)
{
    std::ostringstream os;
    os.precision(17);
    os << "map '" << map << "' left [-1, 1] at iterate " << step << " (value " << value << ")";
    return os.str();
}

} // namespace

DomainEscape::DomainEscape(std::string const& map, long step, double value)
  : Error{escape_message(map, step, value)}, step{step}, value{value}
{}

ConfigError::ConfigError(std::string field, std::string const& message)
  : Error{"config field '" + field + "': " + message}, field{std::move(field)}
{}

} // namespace dictrnn
