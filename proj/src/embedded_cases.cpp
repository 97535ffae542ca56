#include "gridsec/grid_model.hpp"

namespace gridsec::embedded {
extern const char* const ieee118_case_text;
extern const char* const twobus_case_text;
}  // namespace gridsec::embedded

namespace gridsec {

const std::vector<std::string>& embedded_case_names() {
    static const std::vector<std::string> names = {"ieee118", "twobus"};
    return names;
}

NetworkCase load_embedded_case(const std::string& name) {
    if (name == "ieee118") return parse_case(embedded::ieee118_case_text);
    if (name == "twobus") return parse_case(embedded::twobus_case_text);
    throw std::invalid_argument("unknown embedded case '" + name + "'");
}

}  // namespace gridsec
