#include "monolev/cli.hpp"

int main(int argc, char** argv) { return monolev::run(argc, argv); }
