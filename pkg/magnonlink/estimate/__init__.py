from magnonlink.estimate.fitting import (
    DispersionData, FitResult, fit_dispersion, synthesize_dispersion)


__all__ = ['DispersionData', 'FitResult', 'fit_dispersion',
           'synthesize_dispersion']
