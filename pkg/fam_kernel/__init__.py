default_app_config = "fam_kernel.apps.FamKernelConfig"
