from setuptools import setup, find_packages

setup(name="bundleconn",
      version="0.1.0",
      description="Natural connections on vector bundles and their first jet prolongations",
      packages=find_packages(exclude=['unit_tests']),
      install_requires=['numpy', 'sympy', 'tabulate', 'sqlalchemy'],
      scripts=['run_bundleconn.py']
      )
