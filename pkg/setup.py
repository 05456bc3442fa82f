from pathlib import Path

from setuptools import setup, find_packages


setup(
    name='fndarboux',
    version='0.1.0',

    description='Exact Darboux polynomials and first integrals of the FitzHugh-Nagumo '
                'travelling-wave system',
    long_description=(Path(__file__).parent / 'README.md').read_text(encoding='utf-8'),
    long_description_content_type='text/markdown',

    license='MIT',

    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Mathematics',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
    ],

    keywords='darboux polynomial invariant algebraic surface first integral fitzhugh-nagumo',

    packages=find_packages(exclude=['contrib', 'docs', 'tests']),
    package_data={'fndarboux': ['data/appendix.json']},

    python_requires='>=3.8',

    install_requires=[
        'sympy>=1.12',  # DomainMatrix.from_dok / to_dok
        'numpy',
        'scipy',
    ],

    extras_require={
        'test': ['pytest'],
    },

    entry_points={
        'console_scripts': [
            'fn-darboux=fndarboux.cli:main',
        ],
    },
)
