#include <cstdio>

int main()
{
    std::puts("polgap: placeholder");
    return 0;
}
