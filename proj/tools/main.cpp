#include "cityaccess/cli.hpp"

int main(int argc, char** argv) { return cityaccess::cli::run(argc, argv); }
