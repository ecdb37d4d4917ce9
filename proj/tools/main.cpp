#include "autoform/cli.hpp"

int main(int argc, char** argv)
{
    return autoform::cli::run(argc, argv);
}
