from setuptools import setup, find_packages

# Read the contents of the README file
def read_readme():
    try:
        with open('README.md', encoding='utf-8') as f:
            return f.read()
    except FileNotFoundError:
        return "Soft-skill mining and salary analysis for job advertisements."


try:
    with open("skillweaver/version.py") as file:
        content = file.read()
        version = content.strip().split('=')[-1].replace('"', '').strip()
except Exception as e:
    version = "unknown"

setup(
    name='skillweaver',
    version=version,
    keywords='skillweaver, NLP, soft-skills, job-ads, labour-market',
    description='Soft-skill mining and salary analysis for job advertisements.',
    long_description=read_readme(),
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=['tests']),
    license='MIT',
    include_package_data=True,
    package_data={
        'skillweaver': ['data/*.txt', 'data/*.tsv'],
    },
    python_requires='>=3.9',  # Requires Python 3.9 or higher
    test_suite="tests",
    install_requires=[
        'ksuid',
        'pydantic>=2',
        'numpy',
        'scipy',
        'statsmodels',
        'pandas',
        'nltk',
        'termcolor',
        'python-dotenv',
    ],
    tests_require=[
        'pytest',
    ],
    entry_points={
        'console_scripts': [
            'skillweaver=skillweaver.app:start_app',
        ],
    },
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.9',
    ],
)
