"""Bundled demo corpus: fixture databases, gold queries, and beam files.

Everything here is deterministic data. ``build_corpus`` materializes eleven
small SQLite databases, a Spider-format schema description, a 200+-query
gold file with natural-language questions, a 20-example evaluation fixture
with precomputed hypothesis files, and a demo service configuration.
"""

from __future__ import annotations

import json
import sqlite3
from pathlib import Path

from .catalog import load_from_database
from .parser import parse_sql
from .transitions import ast_to_actions, format_actions, tokenize

# -- schema definitions --------------------------------------------------------
# db_id -> list of (create_sql, insert_column_count, rows)

SCHEMAS: dict[str, list[tuple[str, list[tuple]]]] = {
    "dog_kennels": [
        (
            """CREATE TABLE Owners (
                owner_id INTEGER PRIMARY KEY,
                first_name TEXT,
                city TEXT
            )""",
            [
                (1, "Ida", "Lake Tia"),
                (2, "Nora", "Port Hope"),
                (3, "Ben", "Lake Tia"),
                (4, "Rosa", "New Keagan"),
            ],
        ),
        (
            """CREATE TABLE Dogs (
                dog_id INTEGER PRIMARY KEY,
                owner_id INTEGER,
                name TEXT,
                sex TEXT,
                breed_name TEXT,
                age INTEGER,
                FOREIGN KEY (owner_id) REFERENCES Owners(owner_id)
            )""",
            [
                (1, 1, "Kacey", "F", "Eskimo", 6),
                (2, 2, "Hipolito", "M", "Bullmastiff", 9),
                (3, 3, "Mavis", "F", "Bullmastiff", 10),
                (4, 4, "Houston", "M", "Havanese", 4),
                (5, 1, "Jeffrey", "M", "Basset Hound", 2),
                (6, 3, "Merritt", "F", "Havanese", 5),
            ],
        ),
        (
            """CREATE TABLE Treatments (
                treatment_id INTEGER PRIMARY KEY,
                dog_id INTEGER,
                treatment_type TEXT,
                cost_of_treatment REAL,
                date_of_treatment DATE,
                FOREIGN KEY (dog_id) REFERENCES Dogs(dog_id)
            )""",
            [
                (1, 1, "Take for a Walk", 98.0, "2021-03-07"),
                (2, 2, "Vitamin Injection", 45.0, "2021-04-11"),
                (3, 2, "Physical Examination", 207.0, "2021-05-21"),
                (4, 4, "Vitamin Injection", 139.0, "2021-06-02"),
                (5, 5, "Physical Examination", 60.0, "2021-06-19"),
            ],
        ),
    ],
    "products_catalog": [
        (
            """CREATE TABLE products (
                product_id INTEGER PRIMARY KEY,
                product_type_code TEXT,
                product_name TEXT,
                product_price REAL
            )""",
            [
                (1, "Clothes", "red jacket", 734.73),
                (2, "Clothes", "yellow jacket", 687.23),
                (3, "Clothes", "blue jacket", 693.35),
                (4, "Hardware", "keyboard", 155.42),
                (5, "Hardware", "mouse", 109.99),
                (6, "Hardware", "monitor", 239.61),
                (7, "Books", "atlas", 55.50),
                (8, "Books", "almanac", 49.95),
            ],
        ),
    ],
    "company_hiring": [
        (
            """CREATE TABLE employee (
                employee_id INTEGER PRIMARY KEY,
                name TEXT,
                age INTEGER,
                city TEXT
            )""",
            [
                (1, "George Chuter", 23, "Bristol"),
                (2, "Lee Mears", 29, "Bath"),
                (3, "Mark Regan", 43, "Bristol"),
                (4, "Jason Hobson", 30, "Bristol"),
                (5, "Tim Payne", 29, "Wasps"),
                (6, "Andrew Sheridan", 28, "Sale"),
                (7, "Matt Stevens", 29, "Bath"),
                (8, "Phil Vickery", 40, "Wasps"),
            ],
        ),
        (
            """CREATE TABLE shop (
                shop_id INTEGER PRIMARY KEY,
                shop_name TEXT,
                location TEXT,
                number_products INTEGER
            )""",
            [
                (1, "FC Haka", "Valkeakoski", 120),
                (2, "HJK", "Helsinki", 280),
                (3, "FC Inter", "Turku", 306),
                (4, "FF Jaro", "Jakobstad", 110),
            ],
        ),
        (
            """CREATE TABLE hiring (
                employee_id INTEGER,
                shop_id INTEGER,
                start_from YEAR,
                is_full_time TEXT,
                FOREIGN KEY (employee_id) REFERENCES employee(employee_id),
                FOREIGN KEY (shop_id) REFERENCES shop(shop_id)
            )""",
            [
                (1, 1, "2009", "Yes"),
                (2, 2, "2012", "Yes"),
                (3, 3, "2011", "No"),
                (4, 1, "2013", "Yes"),
                (5, 2, "2010", "Yes"),
                (6, 4, "2014", "No"),
            ],
        ),
    ],
    "concert_singer": [
        (
            """CREATE TABLE stadium (
                stadium_id INTEGER PRIMARY KEY,
                name TEXT,
                location TEXT,
                capacity INTEGER
            )""",
            [
                (1, "Stark's Park", "Raith", 10104),
                (2, "Hampden Park", "Glasgow", 52500),
                (3, "Balmoor", "Peterhead", 4000),
                (4, "Gayfield Park", "Arbroath", 4125),
            ],
        ),
        (
            """CREATE TABLE singer (
                singer_id INTEGER PRIMARY KEY,
                name TEXT,
                country TEXT,
                age INTEGER
            )""",
            [
                (1, "Joe Sharp", "Netherlands", 52),
                (2, "Timbaland", "United States", 32),
                (3, "Justin Brown", "France", 29),
                (4, "Rose White", "France", 41),
                (5, "John Nizinik", "France", 43),
                (6, "Tribal King", "France", 25),
            ],
        ),
        (
            """CREATE TABLE concert (
                concert_id INTEGER PRIMARY KEY,
                concert_name TEXT,
                theme TEXT,
                stadium_id INTEGER,
                year YEAR,
                FOREIGN KEY (stadium_id) REFERENCES stadium(stadium_id)
            )""",
            [
                (1, "Auditions", "Free choice", 1, "2014"),
                (2, "Super bootcamp", "Free choice 2", 2, "2014"),
                (3, "Home Visits", "Bleeding Love", 2, "2015"),
                (4, "Week 1", "Wide Awake", 3, "2014"),
                (5, "Week 2", "Happy Tonight", 1, "2015"),
            ],
        ),
        (
            """CREATE TABLE singer_in_concert (
                concert_id INTEGER,
                singer_id INTEGER,
                FOREIGN KEY (concert_id) REFERENCES concert(concert_id),
                FOREIGN KEY (singer_id) REFERENCES singer(singer_id)
            )""",
            [
                (1, 2), (1, 3), (2, 3), (2, 6), (3, 5), (4, 4), (5, 6), (5, 3),
            ],
        ),
    ],
    "world_geo": [
        (
            """CREATE TABLE countries (
                country_id INTEGER PRIMARY KEY,
                name TEXT,
                continent TEXT,
                population INTEGER,
                surface_area REAL
            )""",
            [
                (1, "China", "Asia", 1277558000, 9572900.0),
                (2, "India", "Asia", 1013662000, 3287263.0),
                (3, "Japan", "Asia", 126714000, 377829.0),
                (4, "France", "Europe", 59225700, 551500.0),
                (5, "Germany", "Europe", 82164700, 357022.0),
                (6, "Brazil", "South America", 170115000, 8547403.0),
                (7, "Nigeria", "Africa", 111506000, 923768.0),
                (8, "Egypt", "Africa", 68470000, 1001449.0),
            ],
        ),
        (
            """CREATE TABLE cities (
                city_id INTEGER PRIMARY KEY,
                name TEXT,
                country_id INTEGER,
                population INTEGER,
                FOREIGN KEY (country_id) REFERENCES countries(country_id)
            )""",
            [
                (1, "Shanghai", 1, 9696300),
                (2, "Mumbai", 2, 10500000),
                (3, "Tokyo", 3, 7980230),
                (4, "Paris", 4, 2125246),
                (5, "Berlin", 5, 3386667),
                (6, "Sao Paulo", 6, 9968485),
                (7, "Lagos", 7, 1518000),
                (8, "Cairo", 8, 6789479),
                (9, "Osaka", 3, 2595674),
            ],
        ),
    ],
    "library_loans": [
        (
            """CREATE TABLE books (
                book_id INTEGER PRIMARY KEY,
                title TEXT,
                author_name TEXT,
                publication_year YEAR,
                price REAL
            )""",
            [
                (1, "The Data Garden", "A. Perez", "2011", 25.50),
                (2, "River of Names", "B. Okafor", "2008", 18.00),
                (3, "Deep Data Currents", "A. Perez", "2015", 31.25),
                (4, "Winter Maps", "C. Lindgren", "2011", 22.40),
                (5, "The Long Index", "D. Hassan", "2019", 27.80),
                (6, "Quiet Tables", "B. Okafor", "2003", 15.10),
            ],
        ),
        (
            """CREATE TABLE members (
                member_id INTEGER PRIMARY KEY,
                name TEXT,
                join_year YEAR,
                is_active TEXT
            )""",
            [
                (1, "Maya", "2015", "Yes"),
                (2, "Otto", "2012", "No"),
                (3, "Pria", "2018", "Yes"),
                (4, "Quinn", "2019", "Yes"),
                (5, "Rudi", "2011", "No"),
            ],
        ),
        (
            """CREATE TABLE loans (
                loan_id INTEGER PRIMARY KEY,
                book_id INTEGER,
                member_id INTEGER,
                due_date DATE,
                FOREIGN KEY (book_id) REFERENCES books(book_id),
                FOREIGN KEY (member_id) REFERENCES members(member_id)
            )""",
            [
                (1, 1, 1, "2021-06-15"),
                (2, 3, 1, "2021-07-01"),
                (3, 2, 3, "2021-06-15"),
                (4, 5, 4, "2021-08-09"),
                (5, 1, 3, "2021-09-30"),
            ],
        ),
    ],
    "retail_orders": [
        (
            """CREATE TABLE customers (
                customer_id INTEGER PRIMARY KEY,
                customer_name TEXT,
                city TEXT,
                email TEXT
            )""",
            [
                (1, "Acme Labs", "Denver", "ops@acme.test"),
                (2, "Bolt Co", "Austin", "hi@bolt.test"),
                (3, "Crane Ltd", "Denver", "sales@crane.test"),
                (4, "Dew Works", "Boise", "mail@dew.test"),
            ],
        ),
        (
            """CREATE TABLE orders (
                order_id INTEGER PRIMARY KEY,
                customer_id INTEGER,
                order_date DATE,
                total_amount REAL,
                FOREIGN KEY (customer_id) REFERENCES customers(customer_id)
            )""",
            [
                (1, 1, "2022-01-04", 1200.00),
                (2, 1, "2022-02-11", 350.25),
                (3, 2, "2022-02-14", 99.99),
                (4, 3, "2022-03-01", 770.10),
                (5, 3, "2022-03-18", 1500.00),
                (6, 3, "2022-04-02", 45.80),
            ],
        ),
        (
            """CREATE TABLE order_items (
                item_id INTEGER PRIMARY KEY,
                order_id INTEGER,
                product_name TEXT,
                quantity INTEGER,
                unit_price REAL,
                FOREIGN KEY (order_id) REFERENCES orders(order_id)
            )""",
            [
                (1, 1, "widget", 10, 12.00),
                (2, 1, "gadget", 5, 216.00),
                (3, 2, "widget", 20, 12.00),
                (4, 3, "sprocket", 1, 99.99),
                (5, 4, "gadget", 3, 216.00),
                (6, 5, "turbine", 1, 1500.00),
                (7, 6, "widget", 2, 12.00),
            ],
        ),
    ],
    "school_enroll": [
        (
            """CREATE TABLE students (
                student_id INTEGER PRIMARY KEY,
                name TEXT,
                age INTEGER,
                major TEXT,
                gpa REAL
            )""",
            [
                (1, "Ana", 19, "History", 3.4),
                (2, "Bram", 22, "Physics", 3.9),
                (3, "Cleo", 20, "History", 2.9),
                (4, "Dev", 24, "Physics", 3.1),
                (5, "Elle", 21, "Biology", 3.7),
                (6, "Finn", 18, "History", 3.2),
            ],
        ),
        (
            """CREATE TABLE courses (
                course_id INTEGER PRIMARY KEY,
                course_name TEXT,
                credits INTEGER,
                department TEXT
            )""",
            [
                (1, "Archives", 3, "History"),
                (2, "Mechanics", 4, "Physics"),
                (3, "Optics", 4, "Physics"),
                (4, "Genetics", 3, "Biology"),
            ],
        ),
        (
            """CREATE TABLE enrollments (
                student_id INTEGER,
                course_id INTEGER,
                grade REAL,
                semester TEXT,
                FOREIGN KEY (student_id) REFERENCES students(student_id),
                FOREIGN KEY (course_id) REFERENCES courses(course_id)
            )""",
            [
                (1, 1, 88.0, "Fall"),
                (2, 2, 95.0, "Fall"),
                (2, 3, 91.0, "Spring"),
                (3, 1, 72.0, "Spring"),
                (4, 3, 80.0, "Fall"),
                (5, 4, 97.0, "Fall"),
                (6, 1, 84.0, "Spring"),
            ],
        ),
    ],
    "flight_routes": [
        (
            """CREATE TABLE airports (
                airport_id INTEGER PRIMARY KEY,
                airport_code TEXT,
                airport_name TEXT,
                city TEXT
            )""",
            [
                (1, "APG", "Aberdeen Proving Grounds", "Aberdeen"),
                (2, "ABR", "Municipal", "Aberdeen"),
                (3, "DXB", "International", "Dubai"),
                (4, "YKA", "Kamloops", "Kamloops"),
            ],
        ),
        (
            """CREATE TABLE flights (
                flight_id INTEGER PRIMARY KEY,
                flight_number TEXT,
                dest_airport_id INTEGER,
                source_airport_id INTEGER,
                price REAL,
                FOREIGN KEY (dest_airport_id) REFERENCES airports(airport_id),
                FOREIGN KEY (source_airport_id) REFERENCES airports(airport_id)
            )""",
            [
                (1, "UA101", 1, 3, 420.00),
                (2, "UA205", 2, 1, 180.50),
                (3, "BA310", 3, 4, 910.00),
                (4, "AC077", 4, 2, 260.75),
                (5, "UA118", 1, 4, 555.25),
            ],
        ),
    ],
    "clinic_appointments": [
        (
            """CREATE TABLE doctors (
                doctor_id INTEGER PRIMARY KEY,
                doctor_name TEXT,
                specialty TEXT,
                years_experience INTEGER
            )""",
            [
                (1, "Dr. Iwu", "Cardiology", 15),
                (2, "Dr. Marsh", "Dermatology", 7),
                (3, "Dr. Soto", "Cardiology", 22),
                (4, "Dr. Klein", "Pediatrics", 11),
            ],
        ),
        (
            """CREATE TABLE patients (
                patient_id INTEGER PRIMARY KEY,
                patient_name TEXT,
                birth_year YEAR
            )""",
            [
                (1, "Gil", "1980"),
                (2, "Hana", "1992"),
                (3, "Iris", "1975"),
                (4, "Jon", "2001"),
                (5, "Kim", "1988"),
            ],
        ),
        (
            """CREATE TABLE appointments (
                appointment_id INTEGER PRIMARY KEY,
                doctor_id INTEGER,
                patient_id INTEGER,
                appointment_date DATE,
                fee REAL,
                FOREIGN KEY (doctor_id) REFERENCES doctors(doctor_id),
                FOREIGN KEY (patient_id) REFERENCES patients(patient_id)
            )""",
            [
                (1, 1, 1, "2023-01-09", 210.00),
                (2, 1, 2, "2023-01-16", 210.00),
                (3, 2, 3, "2023-02-01", 95.00),
                (4, 3, 4, "2023-02-05", 250.00),
                (5, 4, 5, "2023-02-12", 130.00),
                (6, 3, 1, "2023-03-03", 250.00),
            ],
        ),
    ],
    "movie_ratings": [
        (
            """CREATE TABLE directors (
                director_id INTEGER PRIMARY KEY,
                director_name TEXT,
                country TEXT
            )""",
            [
                (1, "R. Osei", "Ghana"),
                (2, "S. Petrov", "Bulgaria"),
                (3, "T. Nakamura", "Japan"),
            ],
        ),
        (
            """CREATE TABLE movies (
                movie_id INTEGER PRIMARY KEY,
                title TEXT,
                director_id INTEGER,
                release_year YEAR,
                budget REAL,
                FOREIGN KEY (director_id) REFERENCES directors(director_id)
            )""",
            [
                (1, "Harbor Nights", 1, "2016", 4.5),
                (2, "Glass Orchard", 2, "2019", 11.0),
                (3, "Paper Storm", 1, "2012", 2.2),
                (4, "Silent Meridian", 3, "2020", 25.0),
                (5, "Cobalt Sky", 2, "2021", 7.7),
            ],
        ),
        (
            """CREATE TABLE ratings (
                rating_id INTEGER PRIMARY KEY,
                movie_id INTEGER,
                score REAL,
                votes INTEGER,
                FOREIGN KEY (movie_id) REFERENCES movies(movie_id)
            )""",
            [
                (1, 1, 7.9, 1200),
                (2, 2, 8.4, 5400),
                (3, 3, 6.1, 700),
                (4, 4, 9.0, 9100),
                (5, 5, 7.2, 2300),
                (6, 1, 8.1, 450),
            ],
        ),
    ],
    "music_store": [
        (
            """CREATE TABLE artists (
                artist_id INTEGER PRIMARY KEY,
                artist_name TEXT,
                genre TEXT
            )""",
            [
                (1, "The Lowlands", "Folk"),
                (2, "Neon Bright", "Pop"),
                (3, "Cold Harbor", "Folk"),
                (4, "Velvet Units", "Jazz"),
            ],
        ),
        (
            """CREATE TABLE albums (
                album_id INTEGER PRIMARY KEY,
                album_title TEXT,
                artist_id INTEGER,
                release_year YEAR,
                copies_sold INTEGER,
                FOREIGN KEY (artist_id) REFERENCES artists(artist_id)
            )""",
            [
                (1, "Early Maps", 1, "2010", 52000),
                (2, "City Lights", 2, "2018", 310000),
                (3, "Harbor Songs", 3, "2014", 44000),
                (4, "Quiet Sessions", 1, "2016", 87000),
                (5, "Blue Notes", 4, "2011", 23000),
                (6, "Brighter", 2, "2021", 150000),
            ],
        ),
    ],
}


def build_databases(dest: Path) -> None:
    db_dir = dest / "databases"
    db_dir.mkdir(parents=True, exist_ok=True)
    for db_id, tables in SCHEMAS.items():
        path = db_dir / f"{db_id}.sqlite"
        if path.exists():
            path.unlink()
        conn = sqlite3.connect(path)
        try:
            for create_sql, rows in tables:
                conn.execute(create_sql)
                if rows:
                    table = create_sql.split()[2]
                    marks = ", ".join("?" * len(rows[0]))
                    conn.executemany(
                        f"INSERT INTO {table} VALUES ({marks})", rows
                    )
            conn.commit()
        finally:
            conn.close()


def build_spider_tables(dest: Path) -> None:
    """Spider-format description of the fixture schemas."""
    entries = []
    db_dir = dest / "databases"
    for db_id in SCHEMAS:
        catalog = load_from_database(db_dir / f"{db_id}.sqlite")
        table_names = [t.name for t in catalog.tables]
        column_names: list[list] = [[-1, "*"]]
        column_types = ["text"]
        index_of: dict[tuple[str, str], int] = {}
        primary_keys = []
        for t_idx, table in enumerate(catalog.tables):
            for col in table.columns:
                index_of[(table.name.lower(), col.name.lower())] = len(column_names)
                if col.is_primary_key:
                    primary_keys.append(len(column_names))
                column_names.append([t_idx, col.name])
                column_types.append(col.affinity.value)
        fks = []
        for src, dst in catalog.foreign_keys:
            fks.append(
                [
                    index_of[(src[0].lower(), src[1].lower())],
                    index_of[(dst[0].lower(), dst[1].lower())],
                ]
            )
        entries.append(
            {
                "db_id": db_id,
                "table_names": [t.lower().replace("_", " ") for t in table_names],
                "table_names_original": table_names,
                "column_names": [[i, n.lower().replace("_", " ")] for i, n in column_names],
                "column_names_original": column_names,
                "column_types": column_types,
                "foreign_keys": fks,
                "primary_keys": primary_keys,
            }
        )
    (dest / "tables.json").write_text(json.dumps(entries, indent=1), encoding="utf-8")


# -- gold corpus ------------------------------------------------------------------
# (db_id, question, gold SQL); questions carry the literal evidence the
# tagging oracle needs, phrased the way a user of these schemas would ask.

GOLD_QUERIES: list[tuple[str, str, str]] = [
    ("dog_kennels", "How many dogs are there?",
     "SELECT count(*) FROM Dogs"),
    ("dog_kennels", "What is the average age of the dogs who have gone through any treatments?",
     "SELECT avg(age) FROM Dogs WHERE dog_id IN (SELECT dog_id FROM Treatments)"),
    ("dog_kennels", "List the names of all dogs.",
     "SELECT name FROM Dogs"),
    ("dog_kennels", "What are the different breed names of the dogs?",
     "SELECT DISTINCT breed_name FROM Dogs"),
    ("dog_kennels", "How many female dogs are there?",
     "SELECT count(*) FROM Dogs WHERE sex = 'F'"),
    ("dog_kennels", "What are the name and age of each dog older than 5?",
     "SELECT name, age FROM Dogs WHERE age > 5"),
    ("dog_kennels", "What is the maximum cost of treatment?",
     "SELECT max(cost_of_treatment) FROM Treatments"),
    ("dog_kennels", "How many treatments cost more than 100?",
     "SELECT count(*) FROM Treatments WHERE cost_of_treatment > 100"),
    ("dog_kennels", "What are the names of dogs whose owners live in Lake Tia?",
     "SELECT T1.name FROM Dogs AS T1 JOIN Owners AS T2 ON T1.owner_id = T2.owner_id WHERE T2.city = 'Lake Tia'"),
    ("dog_kennels", "Show each treatment type and the number of treatments of that type.",
     "SELECT treatment_type, count(*) FROM Treatments GROUP BY treatment_type"),
    ("dog_kennels", "What is the average cost of treatment of each treatment type?",
     "SELECT treatment_type, avg(cost_of_treatment) FROM Treatments GROUP BY treatment_type"),
    ("dog_kennels", "Which breed names have more than one dog?",
     "SELECT breed_name FROM Dogs GROUP BY breed_name HAVING count(*) > 1"),
    ("dog_kennels", "What are the names of the dogs sorted by age in descending order?",
     "SELECT name FROM Dogs ORDER BY age DESC"),
    ("dog_kennels", "What are the names of the 3 oldest dogs?",
     "SELECT name FROM Dogs ORDER BY age DESC LIMIT 3"),
    ("dog_kennels", "Return the name of the dog that received the most expensive treatment.",
     "SELECT T1.name FROM Dogs AS T1 JOIN Treatments AS T2 ON T1.dog_id = T2.dog_id ORDER BY T2.cost_of_treatment DESC LIMIT 1"),
    ("dog_kennels", "How many dogs have the sex M and an age above 3?",
     "SELECT count(*) FROM Dogs WHERE sex = 'M' AND age > 3"),
    ("dog_kennels", "What is the total cost of treatment across all treatments?",
     "SELECT sum(cost_of_treatment) FROM Treatments"),
    ("dog_kennels", "Which dates of treatment fall between 2021-04-01 and 2021-06-30?",
     "SELECT date_of_treatment FROM Treatments WHERE date_of_treatment BETWEEN '2021-04-01' AND '2021-06-30'"),
    ("dog_kennels", "List the first names of owners in Lake Tia together with the first names of owners in Port Hope.",
     "SELECT first_name FROM Owners WHERE city = 'Lake Tia' UNION SELECT first_name FROM Owners WHERE city = 'Port Hope'"),
    ("dog_kennels", "What is the average age of the female dogs?",
     "SELECT avg(age) FROM Dogs WHERE sex = 'F'"),
    ("dog_kennels", "How many dogs are there of each sex? Show the sex and the count.",
     "SELECT sex, count(*) FROM Dogs GROUP BY sex"),
    ("dog_kennels", "What are the names of dogs whose breed name is not Bullmastiff?",
     "SELECT name FROM Dogs WHERE breed_name != 'Bullmastiff'"),
    ("dog_kennels", "Which owner ids own more than one dog?",
     "SELECT owner_id FROM Dogs GROUP BY owner_id HAVING count(*) > 1"),
    ("dog_kennels", "Show all information about the dogs.",
     "SELECT * FROM Dogs"),
    ("dog_kennels", "How many different breed names are there?",
     "SELECT count(DISTINCT breed_name) FROM Dogs"),
    ("products_catalog", "Find the different product type codes whose average product price is greater than the average product price over all products.",
     "SELECT product_type_code FROM products GROUP BY product_type_code HAVING avg(product_price) > (SELECT avg(product_price) FROM products)"),
    ("products_catalog", "What is the average product price?",
     "SELECT avg(product_price) FROM products"),
    ("products_catalog", "How many products are there?",
     "SELECT count(*) FROM products"),
    ("products_catalog", "List the names of products with a price below 100.",
     "SELECT product_name FROM products WHERE product_price < 100"),
    ("products_catalog", "What are the different product type codes?",
     "SELECT DISTINCT product_type_code FROM products"),
    ("products_catalog", "Show the name and price of the 5 most expensive products.",
     "SELECT product_name, product_price FROM products ORDER BY product_price DESC LIMIT 5"),
    ("products_catalog", "How many products cost between 100 and 300?",
     "SELECT count(*) FROM products WHERE product_price BETWEEN 100 AND 300"),
    ("products_catalog", "What is the name of the product with the lowest price?",
     "SELECT product_name FROM products ORDER BY product_price LIMIT 1"),
    ("products_catalog", "For each product type code, how many products are there?",
     "SELECT product_type_code, count(*) FROM products GROUP BY product_type_code"),
    ("products_catalog", "What are the names of products whose product type code is Hardware?",
     "SELECT product_name FROM products WHERE product_type_code = 'Hardware'"),
    ("products_catalog", "What are the names of products whose product type code is not Clothes?",
     "SELECT product_name FROM products WHERE product_type_code != 'Clothes'"),
    ("products_catalog", "Count the products of the Clothes type with a price above 600.",
     "SELECT count(*) FROM products WHERE product_price > 600 AND product_type_code = 'Clothes'"),
    ("company_hiring", "Find the cities that have more than one employee younger than 30.",
     "SELECT city FROM employee WHERE age < 30 GROUP BY city HAVING count(*) > 1"),
    ("company_hiring", "For each shop, find the average age of the employees hired and the shop id.",
     "SELECT avg(T1.age), T3.shop_id FROM employee AS T1 JOIN hiring AS T2 ON T1.employee_id = T2.employee_id JOIN shop AS T3 ON T2.shop_id = T3.shop_id GROUP BY T3.shop_id"),
    ("company_hiring", "How many employees are there?",
     "SELECT count(*) FROM employee"),
    ("company_hiring", "What are the names of employees from the city of Bristol?",
     "SELECT name FROM employee WHERE city = 'Bristol'"),
    ("company_hiring", "What is the maximum age among the employees?",
     "SELECT max(age) FROM employee"),
    ("company_hiring", "What are the different cities the employees come from?",
     "SELECT DISTINCT city FROM employee"),
    ("company_hiring", "How many hirings are full time?",
     "SELECT count(*) FROM hiring WHERE is_full_time = 'Yes'"),
    ("company_hiring", "What are the shop names ordered by number of products in descending order?",
     "SELECT shop_name FROM shop ORDER BY number_products DESC"),
    ("company_hiring", "Show the shop name of the shop with the most products.",
     "SELECT shop_name FROM shop ORDER BY number_products DESC LIMIT 1"),
    ("company_hiring", "What is the total number of products of all shops?",
     "SELECT sum(number_products) FROM shop"),
    ("company_hiring", "What are the names of employees aged between 25 and 32?",
     "SELECT name FROM employee WHERE age BETWEEN 25 AND 32"),
    ("company_hiring", "What are the names of employees who are older than 28 or live in Bristol?",
     "SELECT name FROM employee WHERE age > 28 OR city = 'Bristol'"),
    ("company_hiring", "What are the shop names of shops with a hiring starting from 2012 or later?",
     "SELECT T2.shop_name FROM hiring AS T1 JOIN shop AS T2 ON T1.shop_id = T2.shop_id WHERE T1.start_from >= 2012"),
    ("company_hiring", "How many employees live in each city? Show the city and the count.",
     "SELECT city, count(*) FROM employee GROUP BY city"),
    ("company_hiring", "List the shop name and location of all shops.",
     "SELECT shop_name, location FROM shop"),
    ("company_hiring", "What is the difference between the maximum age and the minimum age of the employees?",
     "SELECT max(age) - min(age) FROM employee"),
    ("company_hiring", "Show all information about the employees.",
     "SELECT * FROM employee"),
    ("company_hiring", "What are the ages of employees named Lee Mears?",
     "SELECT age FROM employee WHERE name = 'Lee Mears'"),
    ("concert_singer", "How many singers are there?",
     "SELECT count(*) FROM singer"),
    ("concert_singer", "What are the names of singers from France?",
     "SELECT name FROM singer WHERE country = 'France'"),
    ("concert_singer", "What is the average age of singers from France?",
     "SELECT avg(age) FROM singer WHERE country = 'France'"),
    ("concert_singer", "Show the different countries of the singers.",
     "SELECT DISTINCT country FROM singer"),
    ("concert_singer", "How many concerts were there in 2014?",
     "SELECT count(*) FROM concert WHERE year = 2014"),
    ("concert_singer", "What are the names and capacities of the stadiums?",
     "SELECT name, capacity FROM stadium"),
    ("concert_singer", "What is the name of the stadium with the largest capacity?",
     "SELECT name FROM stadium ORDER BY capacity DESC LIMIT 1"),
    ("concert_singer", "How many concerts happened in each stadium? List the stadium id and the count.",
     "SELECT stadium_id, count(*) FROM concert GROUP BY stadium_id"),
    ("concert_singer", "What are the names of stadiums whose capacity is above 5000?",
     "SELECT name FROM stadium WHERE capacity > 5000"),
    ("concert_singer", "Show the concert names of concerts held in stadiums located in Glasgow.",
     "SELECT T1.concert_name FROM concert AS T1 JOIN stadium AS T2 ON T1.stadium_id = T2.stadium_id WHERE T2.location = 'Glasgow'"),
    ("concert_singer", "How many singers took part in the concert with concert id 1?",
     "SELECT count(*) FROM singer_in_concert WHERE concert_id = 1"),
    ("concert_singer", "What are the names of singers who performed in any concert?",
     "SELECT name FROM singer WHERE singer_id IN (SELECT singer_id FROM singer_in_concert)"),
    ("concert_singer", "What are the names of singers who did not perform in any concert?",
     "SELECT name FROM singer WHERE singer_id NOT IN (SELECT singer_id FROM singer_in_concert)"),
    ("concert_singer", "Show the countries that have more than one singer.",
     "SELECT country FROM singer GROUP BY country HAVING count(*) > 1"),
    ("concert_singer", "What are the names of singers who are older than 40 and younger than 55?",
     "SELECT name FROM singer WHERE age > 40 AND age < 55"),
    ("concert_singer", "Return the name and country of the oldest singer.",
     "SELECT name, country FROM singer ORDER BY age DESC LIMIT 1"),
    ("concert_singer", "What is the average capacity of stadiums located in Glasgow?",
     "SELECT avg(capacity) FROM stadium WHERE location = 'Glasgow'"),
    ("concert_singer", "Show the locations shared by stadiums with capacity above 5000 and stadiums with capacity below 4100.",
     "SELECT location FROM stadium WHERE capacity > 5000 INTERSECT SELECT location FROM stadium WHERE capacity < 4100"),
    ("concert_singer", "List the countries of singers older than 40 together with the countries of singers younger than 27.",
     "SELECT country FROM singer WHERE age > 40 UNION SELECT country FROM singer WHERE age < 27"),
    ("concert_singer", "Show all stadium locations except the locations of stadiums with capacity below 4200.",
     "SELECT location FROM stadium EXCEPT SELECT location FROM stadium WHERE capacity < 4200"),
    ("world_geo", "How many countries are in the Asian continent?",
     "SELECT count(*) FROM countries WHERE continent = 'Asia'"),
    ("world_geo", "What are the names of countries in Europe?",
     "SELECT name FROM countries WHERE continent = 'Europe'"),
    ("world_geo", "What is the total population of the countries in Asia?",
     "SELECT sum(population) FROM countries WHERE continent = 'Asia'"),
    ("world_geo", "What are the different continents?",
     "SELECT DISTINCT continent FROM countries"),
    ("world_geo", "How many cities does each country have? List the country id and the count.",
     "SELECT country_id, count(*) FROM cities GROUP BY country_id"),
    ("world_geo", "What are the names of the 3 countries with the largest population?",
     "SELECT name FROM countries ORDER BY population DESC LIMIT 3"),
    ("world_geo", "What are the names of the cities in China?",
     "SELECT T2.name FROM countries AS T1 JOIN cities AS T2 ON T1.country_id = T2.country_id WHERE T1.name = 'China'"),
    ("world_geo", "What is the average population of countries in Africa?",
     "SELECT avg(population) FROM countries WHERE continent = 'Africa'"),
    ("world_geo", "Which continents have more than 2 countries?",
     "SELECT continent FROM countries GROUP BY continent HAVING count(*) > 2"),
    ("world_geo", "What are the names of countries with a population larger than 100000000?",
     "SELECT name FROM countries WHERE population > 100000000"),
    ("world_geo", "What is the name of the country with the largest surface area?",
     "SELECT name FROM countries ORDER BY surface_area DESC LIMIT 1"),
    ("world_geo", "List the names of cities with population between 2000000 and 8000000.",
     "SELECT name FROM cities WHERE population BETWEEN 2000000 AND 8000000"),
    ("world_geo", "What is the average city population for each continent? Show the continent and the average.",
     "SELECT T1.continent, avg(T2.population) FROM countries AS T1 JOIN cities AS T2 ON T1.country_id = T2.country_id GROUP BY T1.continent"),
    ("world_geo", "Show the names of countries that have no cities listed.",
     "SELECT name FROM countries WHERE country_id NOT IN (SELECT country_id FROM cities)"),
    ("world_geo", "What are the names of countries in Asia or Africa?",
     "SELECT name FROM countries WHERE continent = 'Asia' OR continent = 'Africa'"),
    ("world_geo", "How many cities are there?",
     "SELECT count(*) FROM cities"),
    ("world_geo", "List the continents of all countries except the continents of countries with surface area above 9000000.",
     "SELECT continent FROM countries EXCEPT SELECT continent FROM countries WHERE surface_area > 9000000"),
    ("world_geo", "How many countries have a population above 100000000 and a surface area above 3000000?",
     "SELECT count(*) FROM countries WHERE population > 100000000 AND surface_area > 3000000"),
    ("library_loans", "How many members are active?",
     "SELECT count(*) FROM members WHERE is_active = 'Yes'"),
    ("library_loans", "How many books are there?",
     "SELECT count(*) FROM books"),
    ("library_loans", "What are the titles of books published after 2010?",
     "SELECT title FROM books WHERE publication_year > 2010"),
    ("library_loans", "What are the titles of books whose title contains Data?",
     "SELECT title FROM books WHERE title LIKE '%Data%'"),
    ("library_loans", "Who are the different authors?",
     "SELECT DISTINCT author_name FROM books"),
    ("library_loans", "What is the average price of the books?",
     "SELECT avg(price) FROM books"),
    ("library_loans", "List the titles of the 3 cheapest books.",
     "SELECT title FROM books ORDER BY price LIMIT 3"),
    ("library_loans", "Show each author name and the number of their books.",
     "SELECT author_name, count(*) FROM books GROUP BY author_name"),
    ("library_loans", "Which author names have more than one book?",
     "SELECT author_name FROM books GROUP BY author_name HAVING count(*) > 1"),
    ("library_loans", "What are the titles of books loaned by the member named Maya?",
     "SELECT T1.title FROM books AS T1 JOIN loans AS T2 ON T1.book_id = T2.book_id JOIN members AS T3 ON T2.member_id = T3.member_id WHERE T3.name = 'Maya'"),
    ("library_loans", "What are the names of members who joined after 2014?",
     "SELECT name FROM members WHERE join_year > 2014"),
    ("library_loans", "What are the due dates of loans for the book with book id 1?",
     "SELECT due_date FROM loans WHERE book_id = 1"),
    ("library_loans", "How many loans are due on 2021-06-15?",
     "SELECT count(*) FROM loans WHERE due_date = '2021-06-15'"),
    ("library_loans", "What are the titles of books that have never been loaned?",
     "SELECT title FROM books WHERE book_id NOT IN (SELECT book_id FROM loans)"),
    ("library_loans", "What is the highest price of a book by each author? Show the author name and the price.",
     "SELECT author_name, max(price) FROM books GROUP BY author_name"),
    ("library_loans", "What are the titles and prices of books by B. Okafor?",
     "SELECT title, price FROM books WHERE author_name = 'B. Okafor'"),
    ("library_loans", "What is the number of books published before 2010?",
     "SELECT count(*) FROM books WHERE publication_year < 2010"),
    ("library_loans", "Show each author name and their average book price, for authors whose average price is above 20.",
     "SELECT author_name, avg(price) FROM books GROUP BY author_name HAVING avg(price) > 20"),
    ("library_loans", "What are the names of members who joined between 2012 and 2018?",
     "SELECT name FROM members WHERE join_year BETWEEN 2012 AND 2018"),
    ("retail_orders", "How many customers are there?",
     "SELECT count(*) FROM customers"),
    ("retail_orders", "What are the names of customers in Denver?",
     "SELECT customer_name FROM customers WHERE city = 'Denver'"),
    ("retail_orders", "What is the total amount over all orders?",
     "SELECT sum(total_amount) FROM orders"),
    ("retail_orders", "What is the average total amount of the orders?",
     "SELECT avg(total_amount) FROM orders"),
    ("retail_orders", "List the order ids of orders with total amount greater than 500.",
     "SELECT order_id FROM orders WHERE total_amount > 500"),
    ("retail_orders", "How many orders does each customer have? Show the customer id and the count.",
     "SELECT customer_id, count(*) FROM orders GROUP BY customer_id"),
    ("retail_orders", "Which customer ids have more than 2 orders?",
     "SELECT customer_id FROM orders GROUP BY customer_id HAVING count(*) > 2"),
    ("retail_orders", "What are the names of customers who placed any order?",
     "SELECT customer_name FROM customers WHERE customer_id IN (SELECT customer_id FROM orders)"),
    ("retail_orders", "Which customers placed no orders? Show their names.",
     "SELECT customer_name FROM customers WHERE customer_id NOT IN (SELECT customer_id FROM orders)"),
    ("retail_orders", "Show the order dates of orders placed by the customer Crane Ltd.",
     "SELECT T1.order_date FROM orders AS T1 JOIN customers AS T2 ON T1.customer_id = T2.customer_id WHERE T2.customer_name = 'Crane Ltd'"),
    ("retail_orders", "What are the different product names appearing in order items?",
     "SELECT DISTINCT product_name FROM order_items"),
    ("retail_orders", "What is the maximum quantity in a single order item?",
     "SELECT max(quantity) FROM order_items"),
    ("retail_orders", "What are the order dates sorted in descending order?",
     "SELECT order_date FROM orders ORDER BY order_date DESC"),
    ("retail_orders", "How many order items have a quantity of at least 5?",
     "SELECT count(*) FROM order_items WHERE quantity >= 5"),
    ("retail_orders", "What is the total quantity of items with the product name widget?",
     "SELECT sum(quantity) FROM order_items WHERE product_name = 'widget'"),
    ("retail_orders", "What are the product names of items with quantity greater than 5 or unit price greater than 1000?",
     "SELECT product_name FROM order_items WHERE quantity > 5 OR unit_price > 1000"),
    ("retail_orders", "Show each customer id and the total amount of their orders, for customers with a total above 1000.",
     "SELECT customer_id, sum(total_amount) FROM orders GROUP BY customer_id HAVING sum(total_amount) > 1000"),
    ("retail_orders", "What is the smallest total amount of any order?",
     "SELECT min(total_amount) FROM orders"),
    ("school_enroll", "How many students are there?",
     "SELECT count(*) FROM students"),
    ("school_enroll", "What are the names of students majoring in History?",
     "SELECT name FROM students WHERE major = 'History'"),
    ("school_enroll", "What is the average gpa of the students?",
     "SELECT avg(gpa) FROM students"),
    ("school_enroll", "What are the names of students with a gpa above 3.5?",
     "SELECT name FROM students WHERE gpa > 3.5"),
    ("school_enroll", "What are the different majors?",
     "SELECT DISTINCT major FROM students"),
    ("school_enroll", "How many students are in each major? Show the major and the count.",
     "SELECT major, count(*) FROM students GROUP BY major"),
    ("school_enroll", "Which majors have more than 2 students?",
     "SELECT major FROM students GROUP BY major HAVING count(*) > 2"),
    ("school_enroll", "What are the names of the 2 youngest students?",
     "SELECT name FROM students ORDER BY age LIMIT 2"),
    ("school_enroll", "What are the course names of courses in the Physics department?",
     "SELECT course_name FROM courses WHERE department = 'Physics'"),
    ("school_enroll", "What is the average grade in each course? Show the course id and the average.",
     "SELECT course_id, avg(grade) FROM enrollments GROUP BY course_id"),
    ("school_enroll", "What are the names of students enrolled in the course named Archives?",
     "SELECT T1.name FROM students AS T1 JOIN enrollments AS T2 ON T1.student_id = T2.student_id JOIN courses AS T3 ON T2.course_id = T3.course_id WHERE T3.course_name = 'Archives'"),
    ("school_enroll", "How many enrollments happened in the Fall semester?",
     "SELECT count(*) FROM enrollments WHERE semester = 'Fall'"),
    ("school_enroll", "What is the highest grade among all enrollments?",
     "SELECT max(grade) FROM enrollments"),
    ("school_enroll", "List the names of students aged between 18 and 21.",
     "SELECT name FROM students WHERE age BETWEEN 18 AND 21"),
    ("school_enroll", "What are the names and majors of students with a gpa of at least 3.2?",
     "SELECT name, major FROM students WHERE gpa >= 3.2"),
    ("school_enroll", "How many credits is the course named Optics?",
     "SELECT credits FROM courses WHERE course_name = 'Optics'"),
    ("school_enroll", "List the majors of students older than 20, excluding the majors of students with a gpa below 3.",
     "SELECT major FROM students WHERE age > 20 EXCEPT SELECT major FROM students WHERE gpa < 3"),
    ("school_enroll", "For each major with more than one student, show the major and the average age of its students.",
     "SELECT major, avg(age) FROM students GROUP BY major HAVING count(*) > 1"),
    ("flight_routes", "How many flights are there?",
     "SELECT count(*) FROM flights"),
    ("flight_routes", "What are the flight numbers of flights with a price below 300?",
     "SELECT flight_number FROM flights WHERE price < 300"),
    ("flight_routes", "What is the average price of the flights?",
     "SELECT avg(price) FROM flights"),
    ("flight_routes", "List all the airport codes.",
     "SELECT airport_code FROM airports"),
    ("flight_routes", "What are the airport names of airports in the city of Aberdeen?",
     "SELECT airport_name FROM airports WHERE city = 'Aberdeen'"),
    ("flight_routes", "How many flights arrive at each destination airport? Show the dest airport id and the count.",
     "SELECT dest_airport_id, count(*) FROM flights GROUP BY dest_airport_id"),
    ("flight_routes", "What are the flight numbers of flights arriving at airports in the city of Dubai?",
     "SELECT T1.flight_number FROM flights AS T1 JOIN airports AS T2 ON T1.dest_airport_id = T2.airport_id WHERE T2.city = 'Dubai'"),
    ("flight_routes", "Show the flight number of the most expensive flight.",
     "SELECT flight_number FROM flights ORDER BY price DESC LIMIT 1"),
    ("flight_routes", "How many airports are in the city of Aberdeen?",
     "SELECT count(*) FROM airports WHERE city = 'Aberdeen'"),
    ("flight_routes", "List the flight numbers sorted by price.",
     "SELECT flight_number FROM flights ORDER BY price"),
    ("flight_routes", "What are the flight numbers of flights with a price between 200 and 600?",
     "SELECT flight_number FROM flights WHERE price BETWEEN 200 AND 600"),
    ("flight_routes", "How many flights cost more than 400 or less than 200?",
     "SELECT count(*) FROM flights WHERE price > 400 OR price < 200"),
    ("clinic_appointments", "How many doctors are there?",
     "SELECT count(*) FROM doctors"),
    ("clinic_appointments", "What are the names of doctors whose specialty is Cardiology?",
     "SELECT doctor_name FROM doctors WHERE specialty = 'Cardiology'"),
    ("clinic_appointments", "What is the average fee of the appointments?",
     "SELECT avg(fee) FROM appointments"),
    ("clinic_appointments", "Show the doctor name of the doctor with the most years of experience.",
     "SELECT doctor_name FROM doctors ORDER BY years_experience DESC LIMIT 1"),
    ("clinic_appointments", "What are the different specialties?",
     "SELECT DISTINCT specialty FROM doctors"),
    ("clinic_appointments", "How many appointments does each doctor have? Show the doctor id and the count.",
     "SELECT doctor_id, count(*) FROM appointments GROUP BY doctor_id"),
    ("clinic_appointments", "Which doctor ids have more than one appointment?",
     "SELECT doctor_id FROM appointments GROUP BY doctor_id HAVING count(*) > 1"),
    ("clinic_appointments", "What are the names of patients born after 1985?",
     "SELECT patient_name FROM patients WHERE birth_year > 1985"),
    ("clinic_appointments", "What are the appointment dates of the patient named Gil?",
     "SELECT T1.appointment_date FROM appointments AS T1 JOIN patients AS T2 ON T1.patient_id = T2.patient_id WHERE T2.patient_name = 'Gil'"),
    ("clinic_appointments", "How many appointments have a fee above 200?",
     "SELECT count(*) FROM appointments WHERE fee > 200"),
    ("clinic_appointments", "What is the total fee over all appointments?",
     "SELECT sum(fee) FROM appointments"),
    ("clinic_appointments", "Which patients have no appointments? Show their names.",
     "SELECT patient_name FROM patients WHERE patient_id NOT IN (SELECT patient_id FROM appointments)"),
    ("clinic_appointments", "What are the names of doctors with at least 10 years of experience?",
     "SELECT doctor_name FROM doctors WHERE years_experience >= 10"),
    ("clinic_appointments", "What are the names of doctors with years of experience between 10 and 20?",
     "SELECT doctor_name FROM doctors WHERE years_experience BETWEEN 10 AND 20"),
    ("clinic_appointments", "How many patients were born before 1990?",
     "SELECT count(*) FROM patients WHERE birth_year < 1990"),
    ("clinic_appointments", "What are the fees of appointments sorted by appointment date?",
     "SELECT fee FROM appointments ORDER BY appointment_date"),
    ("movie_ratings", "How many movies are there?",
     "SELECT count(*) FROM movies"),
    ("movie_ratings", "What are the titles of movies released after 2015?",
     "SELECT title FROM movies WHERE release_year > 2015"),
    ("movie_ratings", "What is the average budget of the movies?",
     "SELECT avg(budget) FROM movies"),
    ("movie_ratings", "What are the titles of movies directed by R. Osei?",
     "SELECT T2.title FROM directors AS T1 JOIN movies AS T2 ON T1.director_id = T2.director_id WHERE T1.director_name = 'R. Osei'"),
    ("movie_ratings", "What is the average score of each movie? Show the movie id and the average score.",
     "SELECT movie_id, avg(score) FROM ratings GROUP BY movie_id"),
    ("movie_ratings", "Which movie ids have an average score above 8?",
     "SELECT movie_id FROM ratings GROUP BY movie_id HAVING avg(score) > 8"),
    ("movie_ratings", "What are the titles of the 3 most recent movies?",
     "SELECT title FROM movies ORDER BY release_year DESC LIMIT 3"),
    ("movie_ratings", "How many ratings does each movie have? Show the movie id and the count.",
     "SELECT movie_id, count(*) FROM ratings GROUP BY movie_id"),
    ("movie_ratings", "What are the different countries of the directors?",
     "SELECT DISTINCT country FROM directors"),
    ("movie_ratings", "What are the titles of movies with a budget between 5 and 20?",
     "SELECT title FROM movies WHERE budget BETWEEN 5 AND 20"),
    ("movie_ratings", "What is the highest score among the ratings?",
     "SELECT max(score) FROM ratings"),
    ("movie_ratings", "Show the titles of movies that received any rating.",
     "SELECT title FROM movies WHERE movie_id IN (SELECT movie_id FROM ratings)"),
    ("movie_ratings", "How many movies did each director make? Show the director id and the count.",
     "SELECT director_id, count(*) FROM movies GROUP BY director_id"),
    ("movie_ratings", "What are the titles of movies that got a rating score greater than 8?",
     "SELECT T1.title FROM movies AS T1 JOIN ratings AS T2 ON T1.movie_id = T2.movie_id WHERE T2.score > 8"),
    ("movie_ratings", "What are the titles of movies released in 2016 or 2019?",
     "SELECT title FROM movies WHERE release_year = 2016 OR release_year = 2019"),
    ("movie_ratings", "What is the minimum budget among the movies?",
     "SELECT min(budget) FROM movies"),
    ("music_store", "How many artists are there?",
     "SELECT count(*) FROM artists"),
    ("music_store", "What are the names of artists in the Folk genre?",
     "SELECT artist_name FROM artists WHERE genre = 'Folk'"),
    ("music_store", "What are the different genres?",
     "SELECT DISTINCT genre FROM artists"),
    ("music_store", "What are the album titles of albums released after 2015?",
     "SELECT album_title FROM albums WHERE release_year > 2015"),
    ("music_store", "What is the total number of copies sold across all albums?",
     "SELECT sum(copies_sold) FROM albums"),
    ("music_store", "Which album sold the most copies? Show its album title.",
     "SELECT album_title FROM albums ORDER BY copies_sold DESC LIMIT 1"),
    ("music_store", "How many albums does each artist have? Show the artist id and the count.",
     "SELECT artist_id, count(*) FROM albums GROUP BY artist_id"),
    ("music_store", "What are the album titles of albums by the artist named Neon Bright?",
     "SELECT T2.album_title FROM artists AS T1 JOIN albums AS T2 ON T1.artist_id = T2.artist_id WHERE T1.artist_name = 'Neon Bright'"),
    ("music_store", "What is the average number of copies sold per album?",
     "SELECT avg(copies_sold) FROM albums"),
    ("music_store", "Which artist ids have more than one album?",
     "SELECT artist_id FROM albums GROUP BY artist_id HAVING count(*) > 1"),
    ("music_store", "List the album titles sorted by release year.",
     "SELECT album_title FROM albums ORDER BY release_year"),
    ("music_store", "What are the names of artists who released no albums?",
     "SELECT artist_name FROM artists WHERE artist_id NOT IN (SELECT artist_id FROM albums)"),
    ("music_store", "What are the album titles of albums with copies sold of at most 50000?",
     "SELECT album_title FROM albums WHERE copies_sold <= 50000"),
    ("music_store", "How many albums were released between 2010 and 2018?",
     "SELECT count(*) FROM albums WHERE release_year BETWEEN 2010 AND 2018"),
]


# -- evaluation fixture ------------------------------------------------------------
# 20 examples with 5-hypothesis beam files; correct hypothesis placed at a
# known rank so top-1 < top-3 < top-5 comes out strictly monotone.

EVAL_PICKS = [0, 2, 4, 27, 28, 55, 56, 59, 74, 75, 92, 94, 111, 113, 126, 129,
              144, 157, 173, 189]
# rank of the gold hypothesis inside each 5-row beam; None = absent
EVAL_GOLD_RANK = [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 2, 2, 2, 4, 4,
                  None, None, None]


def _mutations(ast, catalog):
    """Deterministic wrong-but-legal variants of a gold query."""
    import copy

    from .sqlast import ColumnExpr, ColumnRef, Literal, LiteralKind, OrderLimit

    out = []
    table = catalog.table(ast.body.from_clause.tables[0])

    def rotate_column(ref: ColumnRef) -> ColumnRef:
        names = [c.name for c in catalog.table(ref.table).columns]
        if ref.is_star:
            return ColumnRef(ref.table, names[0])
        idx = [n.lower() for n in names].index(ref.column.lower())
        return ColumnRef(ref.table, names[(idx + 1) % len(names)])

    # different projected column
    m = copy.deepcopy(ast)
    sel = m.body.projections[0]
    if isinstance(sel.expr, ColumnExpr):
        sel.expr.ref = rotate_column(sel.expr.ref)
        out.append(m)

    # different aggregate (or aggregate added)
    m = copy.deepcopy(ast)
    sel = m.body.projections[0]
    if isinstance(sel.expr, ColumnExpr):
        from .sqlast import AggOp

        if sel.agg is AggOp.COUNT and sel.expr.ref.is_star:
            sel.expr.ref = ColumnRef(sel.expr.ref.table, table.columns[0].name)
            sel.agg = None
        elif sel.agg is not None:
            order = [AggOp.COUNT, AggOp.MAX, AggOp.MIN, AggOp.SUM, AggOp.AVG]
            sel.agg = order[(order.index(sel.agg) + 1) % len(order)]
        else:
            sel.agg = AggOp.COUNT
        out.append(m)

    # dropped filter, or an added row cap
    m = copy.deepcopy(ast)
    if m.body.where is not None:
        m.body.where = None
    elif m.order_limit is None:
        m.order_limit = OrderLimit(keys=[], limit=Literal("2", LiteralKind.NUMBER))
    else:
        m.order_limit = None
    out.append(m)

    # second different column
    m = copy.deepcopy(ast)
    sel = m.body.projections[0]
    if isinstance(sel.expr, ColumnExpr):
        sel.expr.ref = rotate_column(rotate_column(sel.expr.ref))
        out.append(m)
    return out


def build_eval_fixture(dest: Path) -> None:
    eval_dir = dest / "eval"
    beams_dir = eval_dir / "beams"
    beams_dir.mkdir(parents=True, exist_ok=True)
    db_dir = dest / "databases"
    catalogs = {}
    gold_rows = []
    for example_idx, (pick, gold_rank) in enumerate(zip(EVAL_PICKS, EVAL_GOLD_RANK)):
        db_id, question, query = GOLD_QUERIES[pick]
        gold_rows.append({"db_id": db_id, "question": question, "query": query})
        if db_id not in catalogs:
            catalogs[db_id] = load_from_database(db_dir / f"{db_id}.sqlite")
        catalog = catalogs[db_id]
        tokens = tokenize(question)
        gold_ast = parse_sql(query, catalog)
        variants = _mutations(gold_ast, catalog)

        rows: list[dict] = []
        variant_iter = iter(variants)
        for rank in range(5):
            if rank == gold_rank:
                ast = gold_ast
            else:
                ast = next(variant_iter, None)
            if ast is None:
                rows.append({"actions": ["AR:0", "SC:9999"], "logps": [-1.0, -1.0]})
                continue
            try:
                actions = format_actions(ast_to_actions(ast, catalog, tokens), catalog)
            except Exception:
                rows.append({"actions": ["AR:0", "SC:9999"], "logps": [-1.0, -1.0]})
                continue
            logps = [-(rank + 1) * 0.1] + [0.0] * (len(actions) - 1)
            rows.append({"actions": actions, "logps": logps})
        if gold_rank is None:
            # keep one deliberately malformed hypothesis in the never-correct beams
            rows[4] = {"actions": ["AR:0", "SC:9999"], "logps": [-0.5, -0.5]}
        with open(beams_dir / f"{example_idx}.jsonl", "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")
    (eval_dir / "gold.json").write_text(json.dumps(gold_rows, indent=1), encoding="utf-8")


def build_corpus(dest: str | Path) -> Path:
    """Materialize the whole demo corpus under ``dest`` and return the path."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    build_databases(dest)
    build_spider_tables(dest)
    gold = [
        {"db_id": db_id, "question": question, "query": query}
        for db_id, question, query in GOLD_QUERIES
    ]
    (dest / "gold.json").write_text(json.dumps(gold, indent=1), encoding="utf-8")
    build_eval_fixture(dest)
    term_dir = dest / "term_maps"
    term_dir.mkdir(exist_ok=True)
    (term_dir / "dog_kennels.tsv").write_text(
        "Dogs.sex\tfemale\tF\nDogs.sex\tmale\tM\n", encoding="utf-8"
    )
    config = {
        "database_dir": "databases",
        "beam": {"size": 5, "alpha": 3.0, "beta": 0.1},
        "sources": {"default": "heuristic"},
        "term_maps": {"dog_kennels": "term_maps/dog_kennels.tsv"},
        "row_cap": 10000,
        "exec_timeout": 5.0,
    }
    (dest / "config.json").write_text(json.dumps(config, indent=1), encoding="utf-8")
    return dest
