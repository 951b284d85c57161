# owc-alloc simulator package
