def solution(table_data):
    n = count(table_data)
    if n:
        return n
    return 0
