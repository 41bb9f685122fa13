"""Infinitely many genes model on the Kingman coalescent: simulation,
pangenome statistics, closed-form moments and spectrum fitting."""
from .genealogy import (Genealogy, SurvivalProfile, TreePiece, conditional_mean_genes,
                        sample_kingman, spanning_subtree_decomposition, survival_profile,
                        total_length)
from .geneprocess import (ModelParams, PresenceMatrix, hoppe_urn_spectrum, simulate_genes,
                          simulate_sample)
from .infer import FitError, FitResult, fit_params, predicted_spectrum
from .stats import (SpectrumCounts, StatReport, average_gene_number, gene_frequency_spectrum,
                    incongruence_bruteforce, incongruence_statistic, mean_pairwise_differences,
                    pangenome_size, quadruple_difference, report, with_core)
from .theory import (MomentSet, covariances, g_recursion, h_function, mean_G, mean_P,
                     moments_A, moments_D, moments_G, spectrum_mean, spectrum_mean_beta)

__version__ = "0.1.0"
