#include <doctest.h>

#include <sstream>

#include "hdlr/csv.hpp"
#include "hdlr/errors.hpp"

TEST_CASE("csv reader round trip") {
    std::istringstream is("j,lambda\n0,0.5\n1,1.25\n");
    const auto table = hdlr::read_csv(is);
    REQUIRE(table.header.size() == 2);
    CHECK(table.column("lambda") == 1);
    CHECK(table.column("missing") == -1);
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[1][1] == "1.25");
}

TEST_CASE("csv reader reports the offending line") {
    std::istringstream is("a,b\n1,2\n3\n");
    try {
        hdlr::read_csv(is);
        FAIL("expected IoError");
    } catch (const hdlr::IoError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::istringstream empty("");
    CHECK_THROWS_AS(hdlr::read_csv(empty), hdlr::IoError);
}

TEST_CASE("csv reader tolerates CRLF and blank lines") {
    std::istringstream is("a,b\r\n\r\n1,2\r\n");
    const auto table = hdlr::read_csv(is);
    REQUIRE(table.rows.size() == 1);
    CHECK(table.rows[0][0] == "1");
}
